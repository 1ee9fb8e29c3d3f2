#include "tsbench/demand.hpp"

#include "tsbench/harness.hpp"
#include "tsbench/random.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tsbench::harness {

namespace fs = std::filesystem;

ParseError::ParseError(int row, std::string column, const std::string& what)
    : std::runtime_error("line " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") + ": " +
                         what),
      row_(row),
      column_(std::move(column)) {}

const TimeSeries& DemandDataset::at(const std::string& product) const {
    for (std::size_t i = 0; i < products.size(); ++i) {
        if (products[i] == product) return series[i];
    }
    throw std::out_of_range("no product '" + product + "'");
}

namespace {

std::string trim(std::string s) {
    const auto ws = " \t\r\n\"";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

}  // namespace

DemandDataset load_demand_csv(const fs::path& path, const std::map<std::string, std::string>& column_map,
                              char delimiter, int expected_rows) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open demand file " + path.string());
    }
    if (column_map.empty()) {
        throw std::invalid_argument("load_demand_csv: empty column map");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(1, "", "file is empty");
    }
    const auto header = split_cells(line, delimiter);
    if (header.size() < 2) {
        throw ParseError(1, "", std::string("header has a single column; wrong delimiter '") + delimiter + "'?");
    }
    std::vector<std::size_t> idx;
    DemandDataset data;
    for (const auto& [product, name] : column_map) {
        const auto it = std::find(header.begin(), header.end(), trim(name));
        if (it == header.end()) {
            throw ParseError(1, name, "missing column");
        }
        data.products.push_back(product);
        idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<std::vector<double>> cols(idx.size());
    int lineno = 1;
    int rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_cells(line, delimiter);
        if (cells.size() != header.size()) {
            throw ParseError(lineno, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                             std::to_string(cells.size()));
        }
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::string& cell = cells[idx[k]];
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError(lineno, header[idx[k]], "non-numeric value '" + cell + "'");
            }
            cols[k].push_back(v);
        }
        ++rows;
    }
    if (rows != expected_rows) {
        throw ParseError(lineno, "", "expected " + std::to_string(expected_rows) + " data rows, found " +
                                         std::to_string(rows));
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
        data.series.emplace_back(as_eigen(cols[k]), "demand:" + data.products[k]);
    }
    return data;
}

std::vector<RealDataRow> evaluate_demand(const DemandDataset& data, const std::vector<eval::Method>& methods,
                                         int train_len, int horizon, const eval::MethodConfig& cfg,
                                         std::uint64_t seed_base) {
    std::vector<RealDataRow> out;
    for (std::size_t p = 0; p < data.products.size(); ++p) {
        for (const auto m : methods) {
            const std::uint64_t seed = derive_seed(seed_base, "demand:" + data.products[p], static_cast<std::uint64_t>(m));
            out.push_back({data.products[p], m, eval::rolling_cv(data.series[p], m, train_len, horizon, cfg, seed)});
        }
    }
    return out;
}

void write_realdata_csv(const std::vector<RealDataRow>& rows, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "product,method,mse,mape,horizon,fit_failures\n";
    for (const auto& r : rows) {
        out << r.product << ',' << eval::to_string(r.method) << ',' << format_double(r.result.metrics.mse) << ','
            << format_double(r.result.metrics.mape) << ',' << r.result.log.size() << ',' << r.result.fit_failures
            << "\n";
    }
}

}  // namespace tsbench::harness
