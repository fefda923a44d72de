#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sqz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitLockFailure = 3;
inline constexpr int kExitAnalysisFailure = 4;

struct CommonOptions {
    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    int jobs = 0;  // 0 = hardware concurrency
    bool csv = false;
};

int cmd_run(const CommonOptions& opt);
int cmd_sweep(const CommonOptions& opt);
int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                const std::string& out_dir);
int cmd_calibrate(const CommonOptions& opt);
int cmd_validate(const CommonOptions& opt);

}  // namespace sqz::cli
