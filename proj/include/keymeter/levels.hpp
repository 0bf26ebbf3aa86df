#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "keymeter/result.hpp"

namespace keymeter {

enum class AlgoCategory { EllipticCurve, PostQuantum, Classic };

const char* category_name(AlgoCategory category);

/// Maps one benchmarked algorithm to its NIST security level. `aliases`
/// cover the different spellings an algorithm arrives under: the display
/// name, the short name, and the key-generation descriptor used on the
/// command line (e.g. "EC -pkeyopt ec_paramgen_curve:P-521").
struct SecurityLevelEntry {
    std::string display_label;
    int nist_level = 1; // 1..5
    AlgoCategory category = AlgoCategory::Classic;
    int equiv_bits = 0;
    bool equiv_approx = false; // rendered with a leading '~'
    std::vector<std::string> aliases;
};

class SecurityLevelMap {
public:
    /// The built-in categorisation covering the sixteen benchmarked
    /// algorithms.
    static SecurityLevelMap builtin();

    /// Override table from CSV:
    ///   level,category,equiv_bits,display_label,aliases...
    /// category in {classic, ecc, pq}; equiv_bits may carry a '~' prefix;
    /// '#' lines are comments.
    static Result<SecurityLevelMap> load_csv(const std::filesystem::path& path);

    /// Lookup by any alias or the display label (whitespace-trimmed).
    Result<SecurityLevelEntry> find(const std::string& algorithm_label) const;

    const std::vector<SecurityLevelEntry>& entries() const { return entries_; }

private:
    std::vector<SecurityLevelEntry> entries_;
};

/// Display ordering within the level tables: within a level, elliptic-curve
/// rows come first, then post-quantum, then classic, sub-sorted by equivalent
/// bits and finally by label so the order is total.
bool level_order_less(const SecurityLevelEntry& a, const SecurityLevelEntry& b);

} // namespace keymeter
