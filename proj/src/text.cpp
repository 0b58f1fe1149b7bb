#include "sstub/text.hpp"

#include "sstub/errors.hpp"

#include <cctype>

namespace sstub {

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.push_back(text.substr(pos));
            break;
        }
        out.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

std::string to_lower(std::string_view text)
{
    std::string out(text);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view text)
{
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!text.empty() && is_space(text.front()))
        text.remove_prefix(1);
    while (!text.empty() && is_space(text.back()))
        text.remove_suffix(1);
    return text;
}

std::string collapse_whitespace(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space)
            out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

bool starts_with(std::string_view text, std::string_view prefix)
{
    return text.substr(0, prefix.size()) == prefix;
}

std::string unquote_c_style(std::string_view text)
{
    if (text.size() < 2 || text.front() != '"')
        return std::string(text);
    if (text.back() != '"')
        throw ParseError("unterminated quoted path: " + std::string(text), 0);

    std::string out;
    text = text.substr(1, text.size() - 2);
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (++i >= text.size())
            throw ParseError("dangling escape in quoted path", 0);
        c = text[i];
        switch (c) {
        case 'a': out += '\a'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'v': out += '\v'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default:
            if (c >= '0' && c <= '3' && i + 2 < text.size()) {
                int value = 0;
                for (int k = 0; k < 3; ++k) {
                    char d = text[i + static_cast<std::size_t>(k)];
                    if (d < '0' || d > '7')
                        throw ParseError("bad octal escape in quoted path", 0);
                    value = value * 8 + (d - '0');
                }
                out += static_cast<char>(value);
                i += 2;
            } else {
                throw ParseError(std::string("unsupported escape \\") + c + " in quoted path", 0);
            }
        }
    }
    return out;
}

} // namespace sstub
