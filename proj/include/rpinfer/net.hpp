#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rpinfer/core.hpp"

namespace rpinfer {

using Asn = std::uint32_t;

// IPv4 address as a host-order integer.
struct Ipv4 {
    std::uint32_t value = 0;

    auto operator<=>(const Ipv4&) const = default;

    static Ipv4 parse(const std::string& text);
    std::string str() const;
};

// IPv4 CIDR block.
struct Prefix {
    std::uint32_t network = 0;  // masked network address
    int length = 0;             // 0..32

    auto operator<=>(const Prefix&) const = default;

    static Prefix parse(const std::string& text);
    std::string str() const;

    bool contains(Ipv4 ip) const;
    bool overlaps(const Prefix& other) const;
    std::uint32_t mask() const;
};

// Longest-prefix-match table mapping prefixes to 32-bit payloads.
// One hash bucket per prefix length; a query probes /32 down to /0.
class PrefixTable {
public:
    void add(const Prefix& p, std::uint32_t payload);
    std::optional<std::uint32_t> lookup(Ipv4 ip) const;
    bool empty() const { return size_ == 0; }
    std::size_t size() const { return size_; }

private:
    std::map<std::uint32_t, std::uint32_t> levels_[33];
    std::size_t size_ = 0;
};

}  // namespace rpinfer
