/**
 * @file report.hpp
 * @brief Named residual magnitudes with run metadata, serialisable to JSON and CSV.
 */
#pragma once

#include <map>
#include <string>

#include "json.hpp"

namespace qexp {

inline constexpr const char* kVersion = "1.0.0";

struct ResidualReport {
    std::map<std::string, double> residuals;
    std::map<std::string, double> tolerances;
    /// Grid and state metadata (N, M, h, kappa, packet width, centres, ...).
    std::map<std::string, double> meta;
    std::map<std::string, std::string> notes;
    long long seed = 0;

    void set(const std::string& name, double value) { residuals[name] = value; }
    double max_residual() const;
    /// Merges residuals of another report under a name prefix.
    void merge(const ResidualReport& other, const std::string& prefix = "");
    /// True when every residual with a tolerance entry is within it.
    bool within_tolerances() const;

    nlohmann::json to_json() const;
    /// Two-column CSV "name,value" with a header row, sorted by name.
    std::string to_csv() const;
};

}  // namespace qexp
