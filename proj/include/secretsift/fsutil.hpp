#pragma once
// Filesystem helpers shared by the screener and the reference indexer:
// tree walking, binary sniffing, UTF-8 sanitizing, and a small worker pool.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace secretsift {

namespace fs = std::filesystem;

inline constexpr std::size_t kBinarySniffBytes = 8 * 1024;
inline constexpr std::size_t kDefaultMaxFileBytes = 1024 * 1024;

/// NUL byte anywhere in the first 8 KiB marks the file as binary.
inline bool looks_binary(std::string_view head) {
    const std::size_t n = std::min(head.size(), kBinarySniffBytes);
    return head.substr(0, n).find('\0') != std::string_view::npos;
}

inline std::optional<std::string> read_file(const fs::path& p, std::size_t max_bytes) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::string data;
    data.resize(max_bytes + 1);
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    data.resize(static_cast<std::size_t>(in.gcount()));
    return data;
}

inline std::string to_repo_relative(const fs::path& root, const fs::path& p) {
    return p.lexically_relative(root).generic_string();
}

/// Walks the working tree under root, returning sorted repo-relative paths of
/// regular files. `.git` directories and symlinks are skipped; files above
/// the size cap or failing the binary sniff are left to the caller to filter
/// (size is cheap to check here, content is not).
inline std::vector<std::string> walk_tree(const fs::path& root, std::size_t max_file_bytes,
                                          std::vector<std::string>* warnings = nullptr) {
    std::error_code ec;
    if (!fs::exists(root, ec) || !fs::is_directory(root, ec)) {
        throw std::runtime_error("not a readable directory: " + root.string());
    }
    std::vector<std::string> files;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw std::runtime_error("cannot walk " + root.string() + ": " + ec.message());
    for (auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
        if (ec) {
            if (warnings) warnings->push_back("walk error: " + ec.message());
            break;
        }
        const fs::directory_entry& entry = *it;
        if (entry.is_directory(ec)) {
            if (entry.path().filename() == ".git") it.disable_recursion_pending();
            continue;
        }
        if (entry.is_symlink(ec)) continue;
        if (!entry.is_regular_file(ec)) continue;
        const auto size = entry.file_size(ec);
        if (ec) {
            if (warnings) warnings->push_back("unreadable: " + entry.path().generic_string());
            continue;
        }
        if (size > max_file_bytes) continue;
        files.push_back(to_repo_relative(root, entry.path()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ---------------------------------------------------------------------------
// Line indexing (1-based line numbers throughout)

/// Byte offsets of each line start.
inline std::vector<std::size_t> line_starts(std::string_view content) {
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < content.size(); ++i) {
        if (content[i] == '\n') starts.push_back(i + 1);
    }
    return starts;
}

inline std::size_t line_of_offset(const std::vector<std::size_t>& starts, std::size_t off) {
    auto it = std::upper_bound(starts.begin(), starts.end(), off);
    return static_cast<std::size_t>(it - starts.begin());
}

/// End offset of 1-based line `n` (clamped to the last line), excluding the
/// trailing newline.
inline std::size_t line_end_offset(std::string_view content, const std::vector<std::size_t>& starts,
                                   std::size_t n) {
    std::size_t end = (n >= starts.size()) ? content.size() : starts[n];
    if (end > 0 && content[end - 1] == '\n') {
        --end;
        if (end > 0 && content[end - 1] == '\r') --end;
    }
    return end;
}

// ---------------------------------------------------------------------------
// UTF-8 handling

/// Length of the UTF-8 sequence starting at s[i], or 0 if invalid.
inline std::size_t utf8_seq_len(std::string_view s, std::size_t i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) return 1;
    if ((c >> 5) == 0x6) len = 2;
    else if ((c >> 4) == 0xE) len = 3;
    else if ((c >> 3) == 0x1E) len = 4;
    else return 0;
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return 0;
    }
    return len;
}

/// Sanitizes a byte range into valid UTF-8, replacing invalid sequences with
/// U+FFFD, and truncates to at most max_bytes without splitting a code point.
inline std::string utf8_sanitize(std::string_view s, std::size_t max_bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(std::min(s.size(), max_bytes));
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t len = utf8_seq_len(s, i);
        std::string_view piece = (len == 0) ? kReplacement : s.substr(i, len);
        if (out.size() + piece.size() > max_bytes) break;
        out.append(piece);
        i += (len == 0) ? 1 : len;
    }
    return out;
}

/// Like utf8_sanitize but keeps the tail of the range instead of the head.
inline std::string utf8_sanitize_tail(std::string_view s, std::size_t max_bytes) {
    if (s.size() <= max_bytes) return utf8_sanitize(s, max_bytes);
    std::size_t cut = s.size() - max_bytes;
    // Move forward past any continuation bytes so we start on a boundary.
    while (cut < s.size() && (static_cast<unsigned char>(s[cut]) >> 6) == 0x2) ++cut;
    return utf8_sanitize(s.substr(cut), max_bytes);
}

// ---------------------------------------------------------------------------
// Worker pool

/// Runs fn(i) for i in [0, n) across `jobs` threads. Exceptions inside fn
/// propagate as a runtime_error on the caller thread.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!failed.exchange(true)) first_error = e.what();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("worker failed: " + first_error);
}

}  // namespace secretsift
