#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphtext/kernels.hpp"
#include "graphtext/tensor.hpp"

namespace graphtext {

// Reverse-mode tape over dense tensors. Records primitive applications in
// topological order; backward() walks the tape in reverse and accumulates
// gradients additively. Each Tape is a single-threaded unit of work;
// independent tapes may run on independent threads.
template <typename T>
class Tape {
public:
    using Id = int;

    struct Node {
        std::vector<int> shape;
        std::vector<T> val;
        std::vector<T> grad;          // allocated lazily during backward
        bool needs_grad = false;      // some trainable leaf in the ancestry
        Tensor<T>* writeback = nullptr;
        std::function<void(Tape&, Id)> backward;
    };

    const std::vector<int>& shape(Id id) const { return node(id).shape; }
    const std::vector<T>& val(Id id) const { return node(id).val; }

    T scalar(Id id) const {
        const Node& nd = node(id);
        if (nd.val.size() != 1) throw std::logic_error("Tape: node is not a scalar");
        return nd.val[0];
    }

    std::size_t node_count() const { return nodes_.size(); }

    // ---- leaves ----

    Id constant(std::vector<int> shape, std::vector<T> values) {
        check_shape(shape, values.size());
        return push(std::move(shape), std::move(values), false, nullptr, {});
    }

    Id constant_of(const Tensor<T>& t) {
        return push(t.shape, t.values, false, nullptr, {});
    }

    // Registers a parameter leaf. Gradients flow back into t.grad when
    // t.requires_grad is set; otherwise the tensor participates as a frozen
    // constant (gradients still flow through ops that consume it).
    Id leaf(Tensor<T>& t) {
        return push(t.shape, t.values, t.requires_grad, t.requires_grad ? &t : nullptr, {});
    }

    // ---- primitives ----

    Id matmul(Id a, Id b) {
        const Node& na = node(a);
        const Node& nb = node(b);
        require(na.shape.size() == 2 && nb.shape.size() == 2, "matmul: operands must be 2-d",
                na.shape, nb.shape);
        const int m = na.shape[0], k = na.shape[1], k2 = nb.shape[0], n = nb.shape[1];
        require(k == k2, "matmul: inner dimensions differ", na.shape, nb.shape);
        std::vector<T> out(static_cast<std::size_t>(m) * n);
        kernels::matmul(na.val.data(), nb.val.data(), out.data(), m, k, n);
        return push({m, n}, std::move(out), na.needs_grad || nb.needs_grad, nullptr,
                    [a, b, m, k, n](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        if (t.node(a).needs_grad) {
                            auto& ga = t.ensure_grad(a);
                            std::vector<T> tmp(static_cast<std::size_t>(m) * k);
                            kernels::matmul_bt(g.data(), t.node(b).val.data(), tmp.data(), m, n, k);
                            for (std::size_t i = 0; i < tmp.size(); ++i) ga[i] += tmp[i];
                        }
                        if (t.node(b).needs_grad) {
                            auto& gb = t.ensure_grad(b);
                            // gb[k,n] += sum_m a[m,k] * g[m,n]
                            const auto& av = t.node(a).val;
                            for (int mm = 0; mm < m; ++mm)
                                for (int kk = 0; kk < k; ++kk) {
                                    const T aval = av[static_cast<std::size_t>(mm) * k + kk];
                                    if (aval == T(0)) continue;
                                    const T* grow = g.data() + static_cast<std::size_t>(mm) * n;
                                    T* brow = gb.data() + static_cast<std::size_t>(kk) * n;
                                    for (int nn = 0; nn < n; ++nn) brow[nn] += aval * grow[nn];
                                }
                        }
                    });
    }

    Id add(Id a, Id b) {
        const Node& na = node(a);
        const Node& nb = node(b);
        require(na.shape == nb.shape, "add: shapes differ", na.shape, nb.shape);
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.val[i] + nb.val[i];
        return push(na.shape, std::move(out), na.needs_grad || nb.needs_grad, nullptr,
                    [a, b](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        if (t.node(a).needs_grad) {
                            auto& ga = t.ensure_grad(a);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        }
                        if (t.node(b).needs_grad) {
                            auto& gb = t.ensure_grad(b);
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                        }
                    });
    }

    Id mul(Id a, Id b) {
        const Node& na = node(a);
        const Node& nb = node(b);
        require(na.shape == nb.shape, "mul: shapes differ", na.shape, nb.shape);
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.val[i] * nb.val[i];
        return push(na.shape, std::move(out), na.needs_grad || nb.needs_grad, nullptr,
                    [a, b](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        if (t.node(a).needs_grad) {
                            auto& ga = t.ensure_grad(a);
                            const auto& bv = t.node(b).val;
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                        }
                        if (t.node(b).needs_grad) {
                            auto& gb = t.ensure_grad(b);
                            const auto& av = t.node(a).val;
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                        }
                    });
    }

    Id scale(Id a, T s) {
        const Node& na = node(a);
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.val[i] * s;
        return push(na.shape, std::move(out), na.needs_grad, nullptr, [a, s](Tape& t, Id self) {
            if (!t.node(a).needs_grad) return;
            const auto& g = t.node(self).grad;
            auto& ga = t.ensure_grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
        });
    }

    // M (r x c) + broadcast row vector v (c)
    Id add_rowvec(Id a, Id v) {
        const Node& na = node(a);
        const _Node_check nv = check2d1d(na, node(v), "add_rowvec");
        const int r = nv.r, c = nv.c;
        std::vector<T> out(na.val.size());
        const auto& vv = node(v).val;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                out[static_cast<std::size_t>(i) * c + j] =
                    na.val[static_cast<std::size_t>(i) * c + j] + vv[j];
        return push(na.shape, std::move(out), na.needs_grad || node(v).needs_grad, nullptr,
                    [a, v, r, c](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        if (t.node(a).needs_grad) {
                            auto& ga = t.ensure_grad(a);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        }
                        if (t.node(v).needs_grad) {
                            auto& gv = t.ensure_grad(v);
                            for (int i = 0; i < r; ++i)
                                for (int j = 0; j < c; ++j)
                                    gv[j] += g[static_cast<std::size_t>(i) * c + j];
                        }
                    });
    }

    Id concat_rows(const std::vector<Id>& parts) {
        if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
        const int c = node(parts[0]).shape.at(1);
        int r = 0;
        bool needs = false;
        for (Id p : parts) {
            const Node& np = node(p);
            require(np.shape.size() == 2 && np.shape[1] == c, "concat_rows: column mismatch",
                    np.shape, {r, c});
            r += np.shape[0];
            needs = needs || np.needs_grad;
        }
        std::vector<T> out;
        out.reserve(static_cast<std::size_t>(r) * c);
        for (Id p : parts) out.insert(out.end(), node(p).val.begin(), node(p).val.end());
        std::vector<Id> parts_copy = parts;
        return push({r, c}, std::move(out), needs, nullptr,
                    [parts_copy](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        std::size_t offset = 0;
                        for (Id p : parts_copy) {
                            const std::size_t len = t.node(p).val.size();
                            if (t.node(p).needs_grad) {
                                auto& gp = t.ensure_grad(p);
                                for (std::size_t i = 0; i < len; ++i) gp[i] += g[offset + i];
                            }
                            offset += len;
                        }
                    });
    }

    Id slice_rows(Id a, int r0, int r1) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "slice_rows: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        if (r0 < 0 || r1 > r || r0 >= r1) throw std::invalid_argument("slice_rows: bad range");
        std::vector<T> out(na.val.begin() + static_cast<std::size_t>(r0) * c,
                           na.val.begin() + static_cast<std::size_t>(r1) * c);
        return push({r1 - r0, c}, std::move(out), na.needs_grad, nullptr,
                    [a, r0, c](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        const std::size_t base = static_cast<std::size_t>(r0) * c;
                        for (std::size_t i = 0; i < g.size(); ++i) ga[base + i] += g[i];
                    });
    }

    Id slice_cols(Id a, int c0, int c1) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "slice_cols: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        if (c0 < 0 || c1 > c || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
        const int w = c1 - c0;
        std::vector<T> out(static_cast<std::size_t>(r) * w);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j)
                out[static_cast<std::size_t>(i) * w + j] =
                    na.val[static_cast<std::size_t>(i) * c + c0 + j];
        return push({r, w}, std::move(out), na.needs_grad, nullptr,
                    [a, c0, c, w, r](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < r; ++i)
                            for (int j = 0; j < w; ++j)
                                ga[static_cast<std::size_t>(i) * c + c0 + j] +=
                                    g[static_cast<std::size_t>(i) * w + j];
                    });
    }

    // Row gather; duplicate indices are allowed (backward scatter-adds).
    Id gather_rows(Id a, std::vector<int> idx) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "gather_rows: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        std::vector<T> out(idx.size() * static_cast<std::size_t>(c));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= r) throw std::out_of_range("gather_rows: index");
            for (int j = 0; j < c; ++j)
                out[i * c + j] = na.val[static_cast<std::size_t>(idx[i]) * c + j];
        }
        const int rows_out = static_cast<int>(idx.size());
        return push({rows_out, c}, std::move(out), na.needs_grad, nullptr,
                    [a, idx = std::move(idx), c](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (std::size_t i = 0; i < idx.size(); ++i)
                            for (int j = 0; j < c; ++j)
                                ga[static_cast<std::size_t>(idx[i]) * c + j] += g[i * c + j];
                    });
    }

    Id transpose(Id a) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "transpose: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        std::vector<T> out(na.val.size());
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                out[static_cast<std::size_t>(j) * r + i] = na.val[static_cast<std::size_t>(i) * c + j];
        return push({c, r}, std::move(out), na.needs_grad, nullptr,
                    [a, r, c](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < r; ++i)
                            for (int j = 0; j < c; ++j)
                                ga[static_cast<std::size_t>(i) * c + j] +=
                                    g[static_cast<std::size_t>(j) * r + i];
                    });
    }

    Id reshape(Id a, std::vector<int> shape) {
        const Node& na = node(a);
        if (Tensor<T>::numel(shape) != static_cast<std::int64_t>(na.val.size()))
            throw std::invalid_argument("reshape: element count mismatch");
        return push(std::move(shape), na.val, na.needs_grad, nullptr,
                    [a](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    });
    }

    // Row softmax over the last axis of a 2-d tensor. -inf logits are
    // legal and produce exactly-zero probabilities; a fully masked row is an
    // error.
    Id softmax_rows(Id a) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "softmax_rows: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        std::vector<T> out(na.val.size());
        for (int i = 0; i < r; ++i) {
            const T* row = na.val.data() + static_cast<std::size_t>(i) * c;
            T* orow = out.data() + static_cast<std::size_t>(i) * c;
            T mx = -std::numeric_limits<T>::infinity();
            for (int j = 0; j < c; ++j) mx = std::max(mx, row[j]);
            if (!(mx > -std::numeric_limits<T>::infinity()))
                throw std::runtime_error("softmax_rows: fully masked row");
            T denom = T(0);
            for (int j = 0; j < c; ++j) {
                orow[j] = std::exp(row[j] - mx);
                denom += orow[j];
            }
            for (int j = 0; j < c; ++j) orow[j] /= denom;
        }
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a, r, c](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        const auto& y = t.node(self).val;
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < r; ++i) {
                            const std::size_t base = static_cast<std::size_t>(i) * c;
                            T dot = T(0);
                            for (int j = 0; j < c; ++j) dot += g[base + j] * y[base + j];
                            for (int j = 0; j < c; ++j)
                                ga[base + j] += y[base + j] * (g[base + j] - dot);
                        }
                    });
    }

    Id log_softmax_rows(Id a) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "log_softmax_rows: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        std::vector<T> out(na.val.size());
        for (int i = 0; i < r; ++i) {
            const T* row = na.val.data() + static_cast<std::size_t>(i) * c;
            T* orow = out.data() + static_cast<std::size_t>(i) * c;
            T mx = row[0];
            for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
            T denom = T(0);
            for (int j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
            const T lse = mx + std::log(denom);
            for (int j = 0; j < c; ++j) orow[j] = row[j] - lse;
        }
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a, r, c](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        const auto& y = t.node(self).val;
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < r; ++i) {
                            const std::size_t base = static_cast<std::size_t>(i) * c;
                            T gsum = T(0);
                            for (int j = 0; j < c; ++j) gsum += g[base + j];
                            for (int j = 0; j < c; ++j)
                                ga[base + j] += g[base + j] - std::exp(y[base + j]) * gsum;
                        }
                    });
    }

    Id sum_all(Id a) {
        const Node& na = node(a);
        T s = T(0);
        for (T v : na.val) s += v;
        return push({1}, {s}, na.needs_grad, nullptr, [a](Tape& t, Id self) {
            if (!t.node(a).needs_grad) return;
            const T g = t.node(self).grad[0];
            auto& ga = t.ensure_grad(a);
            for (auto& v : ga) v += g;
        });
    }

    Id mean_all(Id a) {
        const Node& na = node(a);
        const T inv = T(1) / static_cast<T>(na.val.size());
        T s = T(0);
        for (T v : na.val) s += v;
        return push({1}, {s * inv}, na.needs_grad, nullptr, [a, inv](Tape& t, Id self) {
            if (!t.node(a).needs_grad) return;
            const T g = t.node(self).grad[0] * inv;
            auto& ga = t.ensure_grad(a);
            for (auto& v : ga) v += g;
        });
    }

    // Summed negative log-likelihood of targets under row-wise softmax.
    Id cross_entropy_sum(Id logits, std::vector<int> targets) {
        const Node& nl = node(logits);
        require(nl.shape.size() == 2, "cross_entropy_sum: logits must be 2-d", nl.shape, {});
        const int r = nl.shape[0], c = nl.shape[1];
        if (static_cast<int>(targets.size()) != r)
            throw std::invalid_argument("cross_entropy_sum: one target per row required");
        T loss = T(0);
        std::vector<T> probs(nl.val.size());
        for (int i = 0; i < r; ++i) {
            const T* row = nl.val.data() + static_cast<std::size_t>(i) * c;
            if (targets[i] < 0 || targets[i] >= c)
                throw std::out_of_range("cross_entropy_sum: target id out of range");
            T mx = row[0];
            for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
            T denom = T(0);
            for (int j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
            const T lse = mx + std::log(denom);
            loss += lse - row[targets[i]];
            for (int j = 0; j < c; ++j)
                probs[static_cast<std::size_t>(i) * c + j] = std::exp(row[j] - lse);
        }
        return push({1}, {loss}, nl.needs_grad, nullptr,
                    [logits, targets = std::move(targets), probs = std::move(probs), r,
                     c](Tape& t, Id self) {
                        if (!t.node(logits).needs_grad) return;
                        const T g = t.node(self).grad[0];
                        auto& gl = t.ensure_grad(logits);
                        for (int i = 0; i < r; ++i) {
                            const std::size_t base = static_cast<std::size_t>(i) * c;
                            for (int j = 0; j < c; ++j) gl[base + j] += g * probs[base + j];
                            gl[base + targets[i]] -= g;
                        }
                    });
    }

    // out = keep ? x : fill. No gradient flows through replaced entries.
    Id masked_fill(Id a, std::vector<std::uint8_t> keep, T fill) {
        const Node& na = node(a);
        if (keep.size() != na.val.size())
            throw std::invalid_argument("masked_fill: mask size mismatch");
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep[i] ? na.val[i] : fill;
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a, keep = std::move(keep)](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (std::size_t i = 0; i < g.size(); ++i)
                            if (keep[i]) ga[i] += g[i];
                    });
    }

    // Row-wise layer normalization without learned affine terms.
    Id layer_norm_rows(Id a, T eps = T(1e-5)) {
        const Node& na = node(a);
        require(na.shape.size() == 2, "layer_norm_rows: operand must be 2-d", na.shape, {});
        const int r = na.shape[0], c = na.shape[1];
        std::vector<T> out(na.val.size());
        std::vector<T> inv_std(r), mean(r);
        for (int i = 0; i < r; ++i) {
            const T* row = na.val.data() + static_cast<std::size_t>(i) * c;
            T mu = T(0);
            for (int j = 0; j < c; ++j) mu += row[j];
            mu /= static_cast<T>(c);
            T var = T(0);
            for (int j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
            var /= static_cast<T>(c);
            const T is = T(1) / std::sqrt(var + eps);
            mean[i] = mu;
            inv_std[i] = is;
            for (int j = 0; j < c; ++j)
                out[static_cast<std::size_t>(i) * c + j] = (row[j] - mu) * is;
        }
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a, r, c, inv_std = std::move(inv_std)](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        const auto& y = t.node(self).val;  // normalized values
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < r; ++i) {
                            const std::size_t base = static_cast<std::size_t>(i) * c;
                            T gsum = T(0), gysum = T(0);
                            for (int j = 0; j < c; ++j) {
                                gsum += g[base + j];
                                gysum += g[base + j] * y[base + j];
                            }
                            const T invc = T(1) / static_cast<T>(c);
                            for (int j = 0; j < c; ++j)
                                ga[base + j] += inv_std[i] * (g[base + j] - gsum * invc -
                                                              y[base + j] * gysum * invc);
                        }
                    });
    }

    Id gelu(Id a) {
        const Node& na = node(a);
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const T x = na.val[i];
            out[i] = T(0.5) * x * (T(1) + std::erf(x * T(0.7071067811865475)));
        }
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        const auto& xv = t.node(a).val;
                        auto& ga = t.ensure_grad(a);
                        constexpr double inv_sqrt2 = 0.7071067811865475;
                        constexpr double inv_sqrt2pi = 0.3989422804014327;
                        for (std::size_t i = 0; i < g.size(); ++i) {
                            const T x = xv[i];
                            const T cdf = T(0.5) * (T(1) + std::erf(x * T(inv_sqrt2)));
                            const T pdf = T(inv_sqrt2pi) * std::exp(T(-0.5) * x * x);
                            ga[i] += g[i] * (cdf + x * pdf);
                        }
                    });
    }

    Id tanh_act(Id a) {
        const Node& na = node(a);
        std::vector<T> out(na.val.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(na.val[i]);
        return push(na.shape, std::move(out), na.needs_grad, nullptr,
                    [a](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        const auto& y = t.node(self).val;
                        auto& ga = t.ensure_grad(a);
                        for (std::size_t i = 0; i < g.size(); ++i)
                            ga[i] += g[i] * (T(1) - y[i] * y[i]);
                    });
    }

    // Rotary rotation of each row of x by its position angle set:
    // pair p of row i is rotated by angle positions[i] * freqs[p]. positions
    // is a tape node so learnable position values receive gradients.
    Id rope_rows(Id x, Id positions, std::vector<T> freqs) {
        const Node& nx = node(x);
        const Node& np = node(positions);
        require(nx.shape.size() == 2, "rope_rows: x must be 2-d", nx.shape, {});
        const int r = nx.shape[0], c = nx.shape[1];
        if (c % 2 != 0) throw std::invalid_argument("rope_rows: dimension must be even");
        if (static_cast<int>(freqs.size()) != c / 2)
            throw std::invalid_argument("rope_rows: need one frequency per pair");
        if (static_cast<std::int64_t>(np.val.size()) != r)
            throw std::invalid_argument("rope_rows: one position per row required");
        std::vector<T> out(nx.val.size());
        for (int i = 0; i < r; ++i) {
            const T pos = np.val[i];
            const T* row = nx.val.data() + static_cast<std::size_t>(i) * c;
            T* orow = out.data() + static_cast<std::size_t>(i) * c;
            for (int p = 0; p < c / 2; ++p) {
                const T angle = pos * freqs[p];
                const T cs = std::cos(angle), sn = std::sin(angle);
                const T x0 = row[2 * p], x1 = row[2 * p + 1];
                orow[2 * p] = x0 * cs - x1 * sn;
                orow[2 * p + 1] = x0 * sn + x1 * cs;
            }
        }
        return push(nx.shape, std::move(out), nx.needs_grad || np.needs_grad, nullptr,
                    [x, positions, freqs = std::move(freqs), r, c](Tape& t, Id self) {
                        const auto& g = t.node(self).grad;
                        const auto& xv = t.node(x).val;
                        const auto& pv = t.node(positions).val;
                        const bool gx = t.node(x).needs_grad;
                        const bool gp = t.node(positions).needs_grad;
                        if (!gx && !gp) return;
                        for (int i = 0; i < r; ++i) {
                            const T pos = pv[i];
                            const std::size_t base = static_cast<std::size_t>(i) * c;
                            T dpos = T(0);
                            for (int p = 0; p < c / 2; ++p) {
                                const T angle = pos * freqs[p];
                                const T cs = std::cos(angle), sn = std::sin(angle);
                                const T x0 = xv[base + 2 * p], x1 = xv[base + 2 * p + 1];
                                const T g0 = g[base + 2 * p], g1 = g[base + 2 * p + 1];
                                if (gx) {
                                    auto& gxv = t.ensure_grad(x);
                                    gxv[base + 2 * p] += g0 * cs + g1 * sn;
                                    gxv[base + 2 * p + 1] += -g0 * sn + g1 * cs;
                                }
                                if (gp) {
                                    // d(out)/d(angle), then chain through angle = pos * freq
                                    dpos += freqs[p] * (g0 * (-x0 * sn - x1 * cs) +
                                                        g1 * (x0 * cs - x1 * sn));
                                }
                            }
                            if (gp) t.ensure_grad(positions)[i] += dpos;
                        }
                    });
    }

    // out_i = s * mult_i + add_i for a scalar node s.
    Id affine_of_scalar(Id s, std::vector<T> mult, std::vector<T> add) {
        const Node& ns = node(s);
        if (ns.val.size() != 1) throw std::invalid_argument("affine_of_scalar: s must be scalar");
        if (mult.size() != add.size())
            throw std::invalid_argument("affine_of_scalar: mult/add size mismatch");
        const int len = static_cast<int>(mult.size());
        std::vector<T> out(mult.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ns.val[0] * mult[i] + add[i];
        return push({len}, std::move(out), ns.needs_grad, nullptr,
                    [s, mult = std::move(mult)](Tape& t, Id self) {
                        if (!t.node(s).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        T acc = T(0);
                        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * mult[i];
                        t.ensure_grad(s)[0] += acc;
                    });
    }

    // total x total matrix whose (i,j) entry for i,j < n is
    // table[buckets[i*n+j], head]; zero elsewhere.
    Id table_bias(Id table, const std::vector<int>& buckets, int head, int n, int total) {
        const Node& nt = node(table);
        require(nt.shape.size() == 2, "table_bias: table must be 2-d", nt.shape, {});
        const int rows = nt.shape[0], heads = nt.shape[1];
        if (head < 0 || head >= heads) throw std::out_of_range("table_bias: head");
        if (static_cast<int>(buckets.size()) != n * n)
            throw std::invalid_argument("table_bias: need n*n bucket indices");
        std::vector<T> out(static_cast<std::size_t>(total) * total, T(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int b = buckets[static_cast<std::size_t>(i) * n + j];
                if (b < 0 || b >= rows) throw std::out_of_range("table_bias: bucket index");
                out[static_cast<std::size_t>(i) * total + j] =
                    nt.val[static_cast<std::size_t>(b) * heads + head];
            }
        return push({total, total}, std::move(out), nt.needs_grad, nullptr,
                    [table, buckets, head, n, total, heads](Tape& t, Id self) {
                        if (!t.node(table).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& gt = t.ensure_grad(table);
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) {
                                const int b = buckets[static_cast<std::size_t>(i) * n + j];
                                gt[static_cast<std::size_t>(b) * heads + head] +=
                                    g[static_cast<std::size_t>(i) * total + j];
                            }
                    });
    }

    // Embeds an n x n block into the top-left corner of a total x total
    // zero matrix.
    Id pad_block(Id a, int total) {
        const Node& na = node(a);
        require(na.shape.size() == 2 && na.shape[0] == na.shape[1],
                "pad_block: operand must be square", na.shape, {});
        const int n = na.shape[0];
        if (total < n) throw std::invalid_argument("pad_block: total smaller than block");
        std::vector<T> out(static_cast<std::size_t>(total) * total, T(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<std::size_t>(i) * total + j] =
                    na.val[static_cast<std::size_t>(i) * n + j];
        return push({total, total}, std::move(out), na.needs_grad, nullptr,
                    [a, n, total](Tape& t, Id self) {
                        if (!t.node(a).needs_grad) return;
                        const auto& g = t.node(self).grad;
                        auto& ga = t.ensure_grad(a);
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                ga[static_cast<std::size_t>(i) * n + j] +=
                                    g[static_cast<std::size_t>(i) * total + j];
                    });
    }

    // ---- backward ----

    void backward(Id root) {
        Node& nr = node(root);
        if (nr.val.size() != 1) throw std::logic_error("backward: root must be scalar");
        ensure_grad(root)[0] = T(1);
        for (Id id = root; id >= 0; --id) {
            Node& nd = nodes_[id];
            if (nd.grad.empty()) continue;
            if (nd.backward) nd.backward(*this, id);
        }
        for (auto& nd : nodes_) {
            if (nd.writeback && !nd.grad.empty()) {
                nd.writeback->ensure_grad();
                for (std::size_t i = 0; i < nd.grad.size(); ++i)
                    nd.writeback->grad[i] += nd.grad[i];
            } else if (nd.writeback) {
                // Touched parameter with no incoming gradient still gets a
                // populated (zero) slot.
                nd.writeback->ensure_grad();
            }
        }
    }

    std::vector<T>& ensure_grad(Id id) {
        Node& nd = node(id);
        if (nd.grad.empty()) nd.grad.assign(nd.val.size(), T(0));
        return nd.grad;
    }

    Node& node(Id id) {
        if (id < 0 || id >= static_cast<Id>(nodes_.size()))
            throw std::out_of_range("Tape: node id");
        return nodes_[id];
    }
    const Node& node(Id id) const {
        if (id < 0 || id >= static_cast<Id>(nodes_.size()))
            throw std::out_of_range("Tape: node id");
        return nodes_[id];
    }

private:
    struct _Node_check {
        int r, c;
    };

    _Node_check check2d1d(const Node& m, const Node& v, const char* what) const {
        require(m.shape.size() == 2, std::string(what) + ": matrix must be 2-d", m.shape,
                v.shape);
        require(v.shape.size() == 1 && v.shape[0] == m.shape[1],
                std::string(what) + ": vector length must match columns", m.shape, v.shape);
        return {m.shape[0], m.shape[1]};
    }

    static void check_shape(const std::vector<int>& shape, std::size_t n) {
        if (Tensor<T>::numel(shape) != static_cast<std::int64_t>(n))
            throw std::invalid_argument("Tape: value count does not match shape");
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::string out = "[";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(s[i]);
        }
        return out + "]";
    }

    static void require(bool ok, const std::string& msg, const std::vector<int>& a,
                        const std::vector<int>& b) {
        if (!ok) throw std::invalid_argument(msg + " (got " + shape_str(a) + " and " +
                                             shape_str(b) + ")");
    }

    Id push(std::vector<int> shape, std::vector<T> val, bool needs_grad, Tensor<T>* writeback,
            std::function<void(Tape&, Id)> backward) {
        Node nd;
        nd.shape = std::move(shape);
        nd.val = std::move(val);
        nd.needs_grad = needs_grad;
        nd.writeback = writeback;
        nd.backward = std::move(backward);
        nodes_.push_back(std::move(nd));
        return static_cast<Id>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
};

}  // namespace graphtext
