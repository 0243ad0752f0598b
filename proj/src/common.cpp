#include "socratic/common.hpp"

#include <cctype>

namespace socratic {

std::string clock_12h(std::int64_t t_ms) {
    std::int64_t minutes_total = (t_ms / 60000) % (24 * 60);
    if (minutes_total < 0) minutes_total += 24 * 60;
    int h24 = static_cast<int>(minutes_total / 60);
    int m = static_cast<int>(minutes_total % 60);
    int h12 = h24 % 12;
    if (h12 == 0) h12 = 12;
    const char* suffix = h24 < 12 ? "AM" : "PM";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d:%02d %s", h12, m, suffix);
    return buf;
}

std::int64_t parse_clock_12h(std::string_view text) {
    std::string s = trim(text);
    std::size_t colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon > 2) return -1;
    int h = 0, m = 0;
    for (std::size_t i = 0; i < colon; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return -1;
        h = h * 10 + (s[i] - '0');
    }
    if (s.size() < colon + 3) return -1;
    for (std::size_t i = colon + 1; i < colon + 3; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return -1;
        m = m * 10 + (s[i] - '0');
    }
    std::string rest = trim(s.substr(colon + 3));
    bool pm;
    if (rest == "AM" || rest == "am") pm = false;
    else if (rest == "PM" || rest == "pm") pm = true;
    else return -1;
    if (h < 1 || h > 12 || m > 59) return -1;
    int h24 = h % 12 + (pm ? 12 : 0);
    return (static_cast<std::int64_t>(h24) * 60 + m) * 60000;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_entity(std::string_view s) {
    std::string t = trim(s);
    while (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?' || t.back() == ','))
        t.pop_back();
    t = trim(t);
    std::string out;
    out.reserve(t.size());
    bool in_space = false;
    for (char c : t) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace socratic
