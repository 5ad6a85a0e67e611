// Copyright 2026 The kronprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"

namespace kronprec::harness {

namespace {

// 17 significant digits round-trip any double; std::to_chars is
// locale-independent, so the decimal separator is always '.'.
std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("csv: float formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

std::string format_csv(const std::vector<ProbeRecord>& records) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const ProbeRecord& r : records) {
    out += std::to_string(r.step);
    out.push_back(',');
    out += r.target;
    out.push_back(',');
    out += r.estimator;
    out.push_back(',');
    out += format_double(r.cosine);
    out.push_back(',');
    out += r.method;
    out.push_back(',');
    if (r.batch_size) out += std::to_string(*r.batch_size);
    out.push_back(',');
    out += r.label_mode;
    out.push_back(',');
    out += std::to_string(r.seed);
    out.push_back('\n');
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace kronprec::harness
