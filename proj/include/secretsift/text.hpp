#pragma once
// Small text tokenization helpers shared by the check tools.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace secretsift {

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Maximal alphabetic runs, lowercased.
inline std::vector<std::string> alpha_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Alphabetic runs split additionally at lower->Upper camel transitions, so
/// "PaymentClient" yields {"payment", "client"}.
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    char prev = '\0';
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            if (!cur.empty() && std::islower(static_cast<unsigned char>(prev)) &&
                std::isupper(static_cast<unsigned char>(c))) {
                out.push_back(std::move(cur));
                cur.clear();
            }
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
        prev = c;
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Path components of a '/'-separated repo-relative path.
inline std::vector<std::string> path_components(std::string_view path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '/' || c == '\\') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace secretsift
