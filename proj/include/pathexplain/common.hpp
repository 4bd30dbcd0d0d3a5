#pragma once
// Shared plumbing: error taxonomy, deterministic seed derivation, and a
// chunked parallel-for whose results are independent of the thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pathexplain {

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Error taxonomy. Each maps to a distinct process exit code in the CLI:
//   input_error -> 2, contract_error -> 3, divergence_error -> 4.
// ---------------------------------------------------------------------------

/// Malformed user input: files, shapes, flags, unknown names.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A precondition of the requested computation does not hold
/// (non-differentiable activation, budget exceeded, intractable size, ...).
class contract_error : public std::runtime_error {
public:
    explicit contract_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss; carries the epoch where it happened.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& msg, std::size_t epoch)
        : std::runtime_error(msg), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// ---------------------------------------------------------------------------
// Deterministic seed derivation (splitmix64). Every stochastic job derives
// its own stream from (root seed, stable indices), so results do not depend
// on scheduling or thread count.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root) { return splitmix64(root); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t first, Rest... rest) {
    return derive_seed(splitmix64(root ^ splitmix64(first)), rest...);
}

// ---------------------------------------------------------------------------
// Thread pool knob + order-independent parallel chunks.
// ---------------------------------------------------------------------------

namespace detail {
inline std::atomic<int>& thread_knob() {
    static std::atomic<int> n{0};  // 0 = auto (hardware_concurrency)
    return n;
}
}  // namespace detail

inline void set_max_threads(int n) { detail::thread_knob().store(n < 0 ? 0 : n); }

inline int max_threads() {
    int n = detail::thread_knob().load();
    if (n > 0) return n;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs body(chunk_index) for chunk_index in [0, n_chunks), possibly on
/// several threads. Chunk boundaries are the caller's responsibility and must
/// not depend on the thread count; the caller combines per-chunk results in
/// chunk order so the total is bit-identical for any number of threads.
template <class Body>
void parallel_for_chunks(std::size_t n_chunks, const Body& body) {
    if (n_chunks == 0) return;
    int n_threads = max_threads();
    if (n_threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n_chunks);
    std::atomic<bool> failed{false};
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= n_chunks || failed.load()) break;
                try {
                    body(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Splits [0, n) into n_chunks half-open ranges of near-equal size.
/// Boundaries depend only on (n, n_chunks).
inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t n_chunks,
                                                       std::size_t chunk) {
    std::size_t base = n / n_chunks, extra = n % n_chunks;
    std::size_t begin = chunk * base + std::min(chunk, extra);
    std::size_t len = base + (chunk < extra ? 1 : 0);
    return {begin, begin + len};
}

/// Fixed chunk count used by deterministic parallel reductions. Independent
/// of the machine so that per-chunk partial sums combine identically anywhere.
inline std::size_t fixed_chunk_count(std::size_t n_items) {
    const std::size_t kChunks = 64;
    return n_items < kChunks ? (n_items == 0 ? 1 : n_items) : kChunks;
}

/// Formats a double with enough digits to round-trip (used by CSV writers).
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace pathexplain
