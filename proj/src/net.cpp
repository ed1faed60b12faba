#include "rpinfer/net.hpp"

#include <charconv>

namespace rpinfer {

namespace {

// Parses a dotted quad; strict: four octets, no extra characters.
std::uint32_t parse_quad(const std::string& text) {
    std::uint32_t v = 0;
    const char* p = text.data();
    const char* end = p + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        unsigned part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc() || part > 255 || next == p) {
            throw ParseError("invalid IPv4 literal: '" + text + "'");
        }
        v = (v << 8) | part;
        p = next;
        if (octet < 3) {
            if (p == end || *p != '.') {
                throw ParseError("invalid IPv4 literal: '" + text + "'");
            }
            ++p;
        }
    }
    if (p != end) {
        throw ParseError("invalid IPv4 literal: '" + text + "'");
    }
    return v;
}

}  // namespace

Ipv4 Ipv4::parse(const std::string& text) {
    return Ipv4{parse_quad(text)};
}

std::string Ipv4::str() const {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((value >> shift) & 0xff);
        if (shift > 0) out += '.';
    }
    return out;
}

Prefix Prefix::parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) {
        throw ParseError("invalid prefix literal (missing /len): '" + text + "'");
    }
    Ipv4 addr = Ipv4::parse(text.substr(0, slash));
    int len = 0;
    const std::string len_part = text.substr(slash + 1);
    auto [next, ec] =
        std::from_chars(len_part.data(), len_part.data() + len_part.size(), len);
    if (ec != std::errc() || next != len_part.data() + len_part.size() || len < 0 ||
        len > 32) {
        throw ParseError("invalid prefix length: '" + text + "'");
    }
    Prefix p;
    p.length = len;
    p.network = len == 0 ? 0 : (addr.value & ~((len == 32) ? 0u : ((1u << (32 - len)) - 1)));
    return p;
}

std::uint32_t Prefix::mask() const {
    if (length == 0) return 0;
    return ~((length == 32) ? 0u : ((1u << (32 - length)) - 1));
}

std::string Prefix::str() const {
    return Ipv4{network}.str() + "/" + std::to_string(length);
}

bool Prefix::contains(Ipv4 ip) const {
    return (ip.value & mask()) == network;
}

bool Prefix::overlaps(const Prefix& other) const {
    const Prefix& shorter = length <= other.length ? *this : other;
    const Prefix& longer = length <= other.length ? other : *this;
    return (longer.network & shorter.mask()) == shorter.network;
}

void PrefixTable::add(const Prefix& p, std::uint32_t payload) {
    auto [it, inserted] = levels_[p.length].emplace(p.network, payload);
    if (!inserted) {
        it->second = payload;
    } else {
        ++size_;
    }
}

std::optional<std::uint32_t> PrefixTable::lookup(Ipv4 ip) const {
    for (int len = 32; len >= 0; --len) {
        const auto& level = levels_[len];
        if (level.empty()) continue;
        const std::uint32_t mask =
            len == 0 ? 0 : ~((len == 32) ? 0u : ((1u << (32 - len)) - 1));
        auto it = level.find(ip.value & mask);
        if (it != level.end()) return it->second;
    }
    return std::nullopt;
}

}  // namespace rpinfer
