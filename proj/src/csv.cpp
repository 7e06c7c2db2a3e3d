#include "ncdecay/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace ncdecay {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_csv_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (auto f : fields) {
        if (!first) out << ',';
        out << f;
        first = false;
    }
    out << '\n';
}

}  // namespace ncdecay
