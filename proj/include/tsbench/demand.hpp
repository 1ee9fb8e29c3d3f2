#pragma once

#include "tsbench/evaluation.hpp"
#include "tsbench/series.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsbench::harness {

inline constexpr int kDemandRows = 60;

class ParseError : public std::runtime_error {
public:
    ParseError(int row, std::string column, const std::string& what);
    int row() const noexcept { return row_; }  ///< 1-based file line, 0 when not row-specific
    const std::string& column() const noexcept { return column_; }

private:
    int row_;
    std::string column_;
};

struct DemandDataset {
    std::vector<std::string> products;  ///< keys of the column map, in order
    std::vector<TimeSeries> series;

    const TimeSeries& at(const std::string& product) const;
};

/// Reads the selected columns (product -> header name) of a delimited file with a header line.
DemandDataset load_demand_csv(const std::filesystem::path& path, const std::map<std::string, std::string>& column_map,
                              char delimiter = ';', int expected_rows = kDemandRows);

struct RealDataRow {
    std::string product;
    eval::Method method = eval::Method::Naive;
    eval::RollingResult result;
};

std::vector<RealDataRow> evaluate_demand(const DemandDataset& data, const std::vector<eval::Method>& methods,
                                         int train_len, int horizon, const eval::MethodConfig& cfg,
                                         std::uint64_t seed_base);

void write_realdata_csv(const std::vector<RealDataRow>& rows, const std::filesystem::path& path);

}  // namespace tsbench::harness
