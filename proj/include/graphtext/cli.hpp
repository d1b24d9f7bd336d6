#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace graphtext {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    std::string decoder_ckpt;
    std::string encoder_ckpt;
    std::string resume_ckpt;
    std::string suite = "in-domain";
    std::string ablation = "none";
    std::vector<std::string> report_inputs;
    std::optional<std::uint64_t> seed_override;
};

// Batch entry points. All randomness flows from the config seed; identical
// inputs and seed produce byte-identical outputs. Throws ValidationError for
// input/schema problems and other exceptions for runtime failures.
void cmd_gen_data(const CliArgs& args);
void cmd_pretrain_decoder(const CliArgs& args);
void cmd_train(const CliArgs& args);
void cmd_eval(const CliArgs& args);
void cmd_report(const CliArgs& args);

// Argument parsing plus exit-code mapping: 0 success, 1 validation error,
// 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace graphtext
