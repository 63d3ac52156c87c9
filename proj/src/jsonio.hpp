#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace cvp::detail {

template <class Err>
std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Err(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) throw Err(path + ": read failure");
    return std::move(ss).str();
}

// Translates a byte offset from a JSON parse error into line/column.
inline std::string json_offset(const std::string& text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class Err>
nlohmann::json parse_json_file(const std::string& path) {
    const std::string text = slurp_file<Err>(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Err(path + ": parse error at " + json_offset(text, e.byte) + ": " + e.what());
    }
}

template <class Err>
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) throw Err(context + ": unknown key \"" + item.key() + "\"");
    }
}

}  // namespace cvp::detail
