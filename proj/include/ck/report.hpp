#ifndef CK_REPORT_HPP
#define CK_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ck/moments.hpp"
#include "ck/spectrum.hpp"

namespace ck::report {

// Decimal with 17 significant digits; the CSV number format.
std::string fmt(double v);

nlohmann::json to_json(const MomentReport& rep);
nlohmann::json to_json(const Histogram& h);

// Long format: k,m_k,err,engine.
std::string moments_csv(const MomentReport& rep);

// Wide format for several engines: k,<engine>,<engine>_err,...,max_pairwise_dev. Cells are
// empty where an engine has no value for k; the deviation uses the engines present at k.
std::string moments_csv_wide(const std::vector<MomentReport>& reps);
std::vector<std::optional<double>> max_pairwise_deviation(const std::vector<MomentReport>& reps);

std::string histogram_csv(const Histogram& h);

struct MomentRow {
    int k = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::optional<double> theory, theory_err, z_score;
};

// k,mean,stderr,theory,theory_err,z_score with empty cells for missing theory.
std::string moment_table_csv(const std::vector<MomentRow>& rows);

// z = |empirical - theory| / sqrt(theory_err^2 + stderr^2); exact agreement gives 0.
double z_score(double empirical, double stderr_, double theory, double theory_err);

// One eigenvalue per line under the header "lambda".
std::string eigenvalues_csv(const SpectrumSample& s);

// Writes a file, creating parent directories; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& content);

}  // namespace ck::report

#endif
