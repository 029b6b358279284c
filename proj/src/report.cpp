#include "qexp/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace qexp {

double ResidualReport::max_residual() const {
    double m = 0.0;
    for (const auto& [k, v] : residuals) m = std::max(m, v);
    return m;
}

void ResidualReport::merge(const ResidualReport& other, const std::string& prefix) {
    for (const auto& [k, v] : other.residuals) residuals[prefix + k] = v;
    for (const auto& [k, v] : other.tolerances) tolerances[prefix + k] = v;
    for (const auto& [k, v] : other.notes) notes[prefix + k] = v;
    for (const auto& [k, v] : other.meta) meta.emplace(k, v);
}

bool ResidualReport::within_tolerances() const {
    for (const auto& [k, tol] : tolerances) {
        auto it = residuals.find(k);
        if (it == residuals.end()) continue;
        if (!(it->second <= tol)) return false;
    }
    return true;
}

nlohmann::json ResidualReport::to_json() const {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    m["tolerances"] = tolerances;
    m["seed"] = seed;
    m["version"] = kVersion;
    if (!notes.empty()) m["notes"] = notes;
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [k, v] : residuals) {
        if (std::isfinite(v)) r[k] = v;
        else r[k] = nullptr;
    }
    return {{"meta", m}, {"residuals", r}};
}

std::string ResidualReport::to_csv() const {
    std::ostringstream os;
    os << "name,value\n" << std::setprecision(17);
    for (const auto& [k, v] : residuals) os << k << ',' << v << '\n';
    return os.str();
}

}  // namespace qexp
