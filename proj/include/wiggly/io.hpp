#pragma once

#include <iosfwd>
#include <string>

namespace wiggly {

/// %.17g: lossless text for a double.
std::string format_real(double value);

/// Writes `text` to `path`, throwing Error(io) on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wiggly
