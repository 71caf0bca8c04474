#pragma once

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pretex {

// --- strings ---------------------------------------------------------------

std::string trim(std::string_view s);

// Trim plus collapse of internal whitespace runs to a single space.
// Idempotent; case is preserved.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view s, char delim);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// --- hashing / seeding -----------------------------------------------------

// Hex-encoded SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

// Stable 64-bit value derived from (seed, tag). Used to give every sampling
// decision its own reproducible stream, independent of evaluation order.
uint64_t derive_u64(uint64_t seed, std::string_view tag);

// Unbiased integer in [0, n) from the engine's raw output. The standard
// distributions are not portable across implementations, so we draw by
// rejection sampling on mt19937_64 output instead.
size_t uniform_index(std::mt19937_64& rng, size_t n);

// --- files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file + rename so concurrent readers never observe a
// half-written file.
void write_file(const std::filesystem::path& path, std::string_view content);

// --- exact rational values ---------------------------------------------------

// Reduced fraction of non-negative 64-bit integers. Enough headroom for the
// metric computations here (numerators stay far below 2^63).
struct Fraction {
    long long num = 0;
    long long den = 1;

    Fraction() = default;
    Fraction(long long n, long long d);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    // Reduced form is canonical, so equality is field-wise.
    bool operator==(const Fraction& other) const = default;
    bool operator<(const Fraction& other) const;
    bool operator<=(const Fraction& other) const { return *this == other || *this < other; }
};

// C(n, k) as an exact integer; n must stay small (we never exceed n=16).
unsigned long long binomial(unsigned n, unsigned k);

}  // namespace pretex
