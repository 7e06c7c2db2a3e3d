#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace ncdecay {

/// Shortest decimal string that parses back to the same double.
std::string format_real(double v);

/// Writes fields joined by commas and terminated by LF.
void write_csv_row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace ncdecay
