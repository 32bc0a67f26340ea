#pragma once

/**
 * @file dataset_csv.hpp
 * @brief Dataset CSV schema: F11..F33, Fdot11..Fdot33, S11,S22,S33,S23,S13,S12.
 *
 * Decimal text at 17 significant digits, so values round-trip bit-exactly.
 * Writes are atomic (temp file + rename).
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vhgpr/dataset.hpp"
#include "vhgpr/errors.hpp"

namespace vhgpr {

inline const char* kDatasetCsvHeader =
    "F11,F12,F13,F21,F22,F23,F31,F32,F33,"
    "Fdot11,Fdot12,Fdot13,Fdot21,Fdot22,Fdot23,Fdot31,Fdot32,Fdot33,"
    "S11,S22,S33,S23,S13,S12";

namespace csvdetail {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ExperimentError("cannot open " + tmp + " for writing");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace csvdetail

inline void write_dataset_csv(const std::string& path, const std::vector<StressRecord>& records) {
    std::string out = kDatasetCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        std::string row;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                row += csvdetail::format_double(r.state.F(i, j));
                row += ',';
            }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                row += csvdetail::format_double(r.state.Fdot(i, j));
                row += ',';
            }
        for (int k = 0; k < 6; ++k) {
            row += csvdetail::format_double(r.stress[k]);
            if (k < 5) row += ',';
        }
        out += row;
        out += '\n';
    }
    csvdetail::atomic_write(path, out);
}

/// Reads a dataset CSV. With require_stress = false the six stress columns
/// may be absent (state-only inputs for prediction); present columns are
/// still validated against the header.
inline std::vector<StressRecord> read_dataset_csv(const std::string& path,
                                                  bool require_stress = true) {
    std::ifstream in(path);
    if (!in) throw ExperimentError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ExperimentError(path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = csvdetail::split_csv_line(line);
    const auto expected = csvdetail::split_csv_line(kDatasetCsvHeader);
    const std::size_t ncols = header.size();
    if (ncols != 24 && ncols != 18) {
        throw ExperimentError(path + ": expected 24 (or 18 state-only) columns, got " +
                              std::to_string(ncols));
    }
    for (std::size_t c = 0; c < ncols; ++c) {
        if (header[c] != expected[c]) {
            throw ExperimentError(path + ": header column " + std::to_string(c) + " is '" +
                                  header[c] + "', expected '" + expected[c] + "'");
        }
    }
    if (require_stress && ncols != 24) throw ExperimentError(path + ": stress columns required");

    std::vector<StressRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csvdetail::split_csv_line(line);
        if (fields.size() != ncols) {
            throw ExperimentError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(ncols) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        auto value = [&](std::size_t c) {
            try {
                return std::stod(fields[c]);
            } catch (const std::exception&) {
                throw ExperimentError(path + ":" + std::to_string(lineno) + ": bad number '" +
                                      fields[c] + "'");
            }
        };
        Matrix3 F, Fdot;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) F(i, j) = value(3 * i + j);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) Fdot(i, j) = value(9 + 3 * i + j);
        StressRecord rec;
        rec.state = kinematics_from(F, Fdot);
        if (ncols == 24) {
            for (int k = 0; k < 6; ++k) rec.stress[k] = value(18 + k);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace vhgpr
