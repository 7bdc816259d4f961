#ifndef CK_CLI_HPP
#define CK_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ck/moments.hpp"
#include "ck/partitions.hpp"
#include "ck/spectrum.hpp"

namespace ck::cli {

// Every flag of the ck binary. Names follow the long flags with '-' replaced by '_'.
struct Settings {
    std::string law = "gauss";  // gauss | stable | sparse
    double alpha = 2.0;
    double sigma = 1.0;         // stable scale
    double q = 0.5;
    std::string z_law = "rademacher";
    double sigma_z = 1.0;
    double sigma_w = 1.0;
    double sigma_x = 1.0;
    std::string activation = "gauss_odd";
    double cutoff = kDefaultCutoff;
    double act_amplitude = 1.0;
    double act_scale = 1.0;
    double phi = 1.0;
    double psi = 1.0;
    int kmax = 4;
    std::string engine = "auto";  // auto | main | gauss | oracle | all
    long n = 256, m = 256, p = 256;
    long trials = 8;
    int bins = 50;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "ck_out";
    long mc_outer = 4096;
    int mc_inner = 512;
    double coeff_tol = 0.0;
    std::string method = "auto";  // auto | levy | fourier
    bool audit = false;
    bool eigenvalue_files = true;
};

WeightLaw make_law(const Settings& s);
Activation make_activation(const Settings& s);
ModelParams model_params(const Settings& s, std::uint64_t seed);
SimConfig sim_config(const Settings& s, std::uint64_t seed);

// Engine names to run for a settings object ("auto" resolves to gauss or main by law).
std::vector<std::string> resolve_engines(const Settings& s);
MomentReport run_engine(const std::string& engine, const ModelParams& params, int k_max);

// Flat TOML echo of the settings, accepted back by --config.
std::string settings_toml(const Settings& s, std::uint64_t seed);

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Invariant suites at small sizes. WrapRule::omit is the documented b-convention mutation.
std::vector<SuiteResult> selftest(WrapRule wrap = WrapRule::include);

// Entry point of the ck binary. Exit codes: 0 success, 1 compare gate failed or selftest
// failure, 2 usage or configuration error, 3 capability error, 4 other runtime error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ck::cli

#endif
