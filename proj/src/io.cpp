#include "wiggly/io.hpp"

#include <cstdio>
#include <fstream>

#include "wiggly/error.hpp"

namespace wiggly {

std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::io, "failed writing " + path);
}

}  // namespace wiggly
