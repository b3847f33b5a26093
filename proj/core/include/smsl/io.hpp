// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smsl/core.hpp"
#include "smsl/matrix.hpp"

namespace smsl {

enum class MatrixFormat { Csv, Binary };

/// Picks Csv for a ".csv" extension, Binary otherwise.
MatrixFormat format_for_path(const std::filesystem::path &path);

// "SSL1" frame: 4 magic bytes, u64 rows, u64 cols (little endian), then
// rows*cols little-endian IEEE-754 doubles in row-major order.
void write_ssl1(std::ostream &out, const Matrix &m);
Matrix read_ssl1(std::istream &in);

/// Comma-separated decimals, one row per line, no header. Values are written
/// in shortest round-trip form.
void write_csv(std::ostream &out, const Matrix &m);
Matrix read_csv(std::istream &in);

void save_matrix(const std::filesystem::path &path, const Matrix &m,
                 MatrixFormat format);
Matrix load_matrix(const std::filesystem::path &path, MatrixFormat format);

/// All frames of a multi-frame SSL1 file, in order.
std::vector<Matrix> load_ssl1_frames(const std::filesystem::path &path);
void save_ssl1_frames(const std::filesystem::path &path,
                      const std::vector<Matrix> &frames);

RelevancyMatrix load_relevancy(const std::filesystem::path &path,
                               MatrixFormat format);
void save_relevancy(const std::filesystem::path &path, const RelevancyMatrix &c,
                    MatrixFormat format);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

}  // namespace smsl
