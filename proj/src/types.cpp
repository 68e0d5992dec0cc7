#include "lowpapr/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace lowpapr {

namespace {

std::string normalized(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '-' || c == '_' || c == '/' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string_view to_string(Scheme s)
{
    switch (s) {
    case Scheme::Qpsk: return "QPSK";
    case Scheme::Bpsk: return "BPSK";
    case Scheme::Pi2Bpsk: return "PI2_BPSK";
    case Scheme::RoQpsk: return "RO_QPSK";
    }
    return "?";
}

std::string_view to_string(EqualizerKind k)
{
    switch (k) {
    case EqualizerKind::Mf: return "MF";
    case EqualizerKind::Zf: return "ZF";
    case EqualizerKind::Mmse: return "MMSE";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name)
{
    const auto n = normalized(name);
    if (n == "qpsk") return Scheme::Qpsk;
    if (n == "bpsk") return Scheme::Bpsk;
    if (n == "pi2bpsk") return Scheme::Pi2Bpsk;
    if (n == "roqpsk") return Scheme::RoQpsk;
    throw DomainError("unknown scheme '" + std::string(name) + "' (expected QPSK, BPSK, PI2_BPSK or RO_QPSK)");
}

EqualizerKind parse_equalizer(std::string_view name)
{
    const auto n = normalized(name);
    if (n == "mf") return EqualizerKind::Mf;
    if (n == "zf") return EqualizerKind::Zf;
    if (n == "mmse") return EqualizerKind::Mmse;
    throw DomainError("unknown equalizer '" + std::string(name) + "' (expected MF, ZF or MMSE)");
}

}  // namespace lowpapr
