// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/csv.hpp"

#include <charconv>
#include <cmath>

#include "brw/error.hpp"

namespace brw {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw DomainError("cannot open " + path.string() + " for writing");
  for (const std::string& h : header) field(h);
  end_row();
}

void CsvWriter::sep() {
  if (in_row_++ > 0) out_.put(',');
}

CsvWriter& CsvWriter::field(double x) {
  sep();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::field(std::int64_t x) {
  sep();
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  out_.write(buf, r.ptr - buf);
  return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t x) {
  sep();
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  out_.write(buf, r.ptr - buf);
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  sep();
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  return *this;
}

void CsvWriter::end_row() {
  out_.put('\n');
  in_row_ = 0;
  if (!out_) throw DomainError("CSV write failed");
}

}  // namespace brw
