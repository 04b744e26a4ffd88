#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace ctxchain {

using NodeId = std::uint32_t;

// Block identifiers are allocated from a per-run counter; genesis is 0.
// Ordering is used as the final deterministic tie-break in fork choice.
struct BlockId {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(BlockId, BlockId) = default;
    friend constexpr bool operator==(BlockId, BlockId) = default;
};

inline constexpr BlockId kGenesisId{0};

inline std::string to_string(BlockId id) {
    return id == kGenesisId ? std::string("genesis") : "b" + std::to_string(id.value);
}

// Thrown when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ctxchain

template <>
struct std::hash<ctxchain::BlockId> {
    std::size_t operator()(ctxchain::BlockId id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
