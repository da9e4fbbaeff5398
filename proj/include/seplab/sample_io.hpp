#pragma once

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "seplab/distributions.hpp"
#include "seplab/error.hpp"

namespace seplab {

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::IoFailure, "not a number: '" + std::string(s) + "'");
  return v;
}

inline void write_csv(const SampleBatch& b, std::ostream& os) {
  for (int i = 0; i < b.d; ++i) os << 'x' << (i + 1) << ',';
  os << "label\n";
  for (std::size_t j = 0; j < b.size(); ++j) {
    for (double v : b.point(j)) os << format_double(v) << ',';
    os << to_string(b.label) << '\n';
  }
  if (!os) throw Error(ErrorKind::IoFailure, "failed writing sample CSV");
}

inline SampleBatch read_csv(std::istream& is) {
  SampleBatch b;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::IoFailure, "empty sample CSV");
  int cols = 1;
  for (char c : line) cols += (c == ',');
  b.d = cols - 1;
  std::string expected;
  for (int i = 0; i < b.d; ++i) expected += "x" + std::to_string(i + 1) + ",";
  expected += "label";
  if (b.d < 1 || line != expected) throw Error(ErrorKind::IoFailure, "bad sample CSV header: " + line);
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    for (int i = 0; i < b.d; ++i) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) throw Error(ErrorKind::IoFailure, "short sample CSV row");
      b.data.push_back(parse_double(std::string_view(line).substr(pos, comma - pos)));
      pos = comma + 1;
    }
    const std::string lab = line.substr(pos);
    Label l;
    if (lab == "plus") l = Label::plus;
    else if (lab == "minus") l = Label::minus;
    else throw Error(ErrorKind::IoFailure, "bad label '" + lab + "'");
    if (!first && l != b.label) throw Error(ErrorKind::IoFailure, "mixed labels in one batch");
    b.label = l;
    first = false;
  }
  return b;
}

// Binary layout (little endian):
//   "SEPLAB01" | u32 d | u64 n | u8 label | u64 seed | u64 stream_id | d columns of n doubles
inline constexpr char kSampleMagic[8] = {'S', 'E', 'P', 'L', 'A', 'B', '0', '1'};

static_assert(std::endian::native == std::endian::little, "binary sample format assumes a little-endian host");

inline void write_binary(const SampleBatch& b, std::ostream& os) {
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  os.write(kSampleMagic, 8);
  put(std::uint32_t(b.d));
  put(std::uint64_t(b.size()));
  put(std::uint8_t(b.label == Label::plus ? 0 : 1));
  put(b.seed);
  put(b.stream_id);
  std::vector<double> col(b.size());
  for (int i = 0; i < b.d; ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) col[j] = b.data[j * b.d + i];
    os.write(reinterpret_cast<const char*>(col.data()), std::streamsize(col.size() * sizeof(double)));
  }
  if (!os) throw Error(ErrorKind::IoFailure, "failed writing binary samples");
}

inline SampleBatch read_binary(std::istream& is) {
  auto get = [&](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw Error(ErrorKind::IoFailure, "truncated binary sample header");
  };
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSampleMagic, 8) != 0) throw Error(ErrorKind::IoFailure, "bad magic in binary samples");
  std::uint32_t d;
  std::uint64_t n;
  std::uint8_t label;
  SampleBatch b;
  get(d);
  get(n);
  get(label);
  get(b.seed);
  get(b.stream_id);
  if (label > 1) throw Error(ErrorKind::IoFailure, "bad label byte");
  b.d = int(d);
  b.label = label == 0 ? Label::plus : Label::minus;
  b.data.resize(n * d);
  std::vector<double> col(n);
  for (std::uint32_t i = 0; i < d; ++i) {
    is.read(reinterpret_cast<char*>(col.data()), std::streamsize(n * sizeof(double)));
    if (!is) throw Error(ErrorKind::IoFailure, "truncated binary sample column");
    for (std::uint64_t j = 0; j < n; ++j) b.data[j * d + i] = col[j];
  }
  return b;
}

}  // namespace seplab
