// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace brw {

/// Shortest text that reads back to the same double ('.' decimal, no
/// grouping); "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

/// Comma-separated output with a mandatory header and LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& field(double x);
  CsvWriter& field(std::int64_t x);
  CsvWriter& field(std::uint64_t x);
  CsvWriter& field(std::string_view s);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

}  // namespace brw
