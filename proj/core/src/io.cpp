// SPDX-License-Identifier: Apache-2.0
#include "smsl/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "smsl/error.hpp"

namespace smsl {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'S', 'L', '1'};

void put_u64(std::ostream &out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  }
  out.write(bytes.data(), bytes.size());
}

bool get_u64(std::istream &in, std::uint64_t &v) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char *>(bytes.data()), bytes.size())) {
    return false;
  }
  v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return true;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

MatrixFormat format_for_path(const std::filesystem::path &path) {
  return path.extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::Binary;
}

void write_ssl1(std::ostream &out, const Matrix &m) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double x : m.data()) {
    put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing SSL1 frame");
}

Matrix read_ssl1(std::istream &in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::ParseError, "offset 0: missing SSL1 magic");
  }
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  if (!get_u64(in, rows) || !get_u64(in, cols)) {
    throw Error(ErrorCode::ParseError, "offset 4: truncated SSL1 header");
  }
  constexpr std::uint64_t kMaxValues = std::uint64_t{1} << 32;
  if (cols != 0 && rows > kMaxValues / cols) {
    throw Error(ErrorCode::ParseError, "offset 4: implausible SSL1 shape");
  }
  std::vector<double> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    if (!get_u64(in, bits)) {
      throw Error(ErrorCode::ParseError,
                  "offset " + std::to_string(20 + 8 * i) +
                      ": truncated SSL1 payload");
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return Matrix(rows, cols, std::move(values));
}

void write_csv(std::ostream &out, const Matrix &m) {
  std::array<char, 64> buf{};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out.put(',');
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), m(r, c));
      out.write(buf.data(), end - buf.data());
    }
    out.put('\n');
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing CSV");
}

Matrix read_csv(std::istream &in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const std::string field = trim(rest.substr(0, comma));
      double v = 0.0;
      const char *begin = field.data();
      const char *end = begin + field.size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (field.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad number '" +
                        field + "'");
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, got " +
                      std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) {
    throw Error(ErrorCode::ParseError, "line 1: empty matrix file");
  }
  return Matrix(rows, cols, std::move(values));
}

void save_matrix(const std::filesystem::path &path, const Matrix &m,
                 MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  if (format == MatrixFormat::Csv) {
    write_csv(out, m);
  } else {
    write_ssl1(out, m);
  }
}

Matrix load_matrix(const std::filesystem::path &path, MatrixFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    if (format == MatrixFormat::Csv) return read_csv(in);
    Matrix m = read_ssl1(in);
    if (in.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorCode::ParseError, "trailing bytes after SSL1 frame");
    }
    return m;
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<Matrix> load_ssl1_frames(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<Matrix> frames;
  while (in.peek() != std::char_traits<char>::eof()) {
    frames.push_back(read_ssl1(in));
  }
  return frames;
}

void save_ssl1_frames(const std::filesystem::path &path,
                      const std::vector<Matrix> &frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  for (const auto &m : frames) write_ssl1(out, m);
}

RelevancyMatrix load_relevancy(const std::filesystem::path &path,
                               MatrixFormat format) {
  return RelevancyMatrix(load_matrix(path, format));
}

void save_relevancy(const std::filesystem::path &path, const RelevancyMatrix &c,
                    MatrixFormat format) {
  save_matrix(path, c.matrix(), format);
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace smsl
