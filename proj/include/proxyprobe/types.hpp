// SPDX-License-Identifier: Apache-2.0
#pragma once

// Core domain types shared by every stage: addresses, hex payloads,
// selectors, call types, trace and contract records.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "proxyprobe/hex.hpp"
#include "proxyprobe/keccak.hpp"
#include "proxyprobe/time.hpp"

namespace proxyprobe {

// Non-negative arbitrary-precision integer; wei totals overflow 64 bits.
using BigInt = boost::multiprecision::cpp_int;

struct Address {
    std::array<uint8_t, 20> bytes{};

    static std::optional<Address> parse(std::string_view text) {
        auto raw = hex::decode_exact<20>(text);
        if (!raw) return std::nullopt;
        return Address{*raw};
    }

    std::string str() const { return hex::encode(bytes.data(), bytes.size()); }
    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    friend auto operator<=>(const Address&, const Address&) = default;
};

struct TxHash {
    std::array<uint8_t, 32> bytes{};

    static std::optional<TxHash> parse(std::string_view text) {
        auto raw = hex::decode_exact<32>(text);
        if (!raw) return std::nullopt;
        return TxHash{*raw};
    }

    std::string str() const { return hex::encode(bytes.data(), bytes.size()); }

    friend auto operator<=>(const TxHash&, const TxHash&) = default;
};

// Arbitrary-length byte payload (calldata, output, bytecode). Empty is legal
// and distinct from absent, which callers express with std::optional.
struct HexData {
    std::vector<uint8_t> bytes;

    HexData() = default;
    explicit HexData(std::vector<uint8_t> b) : bytes(std::move(b)) {}

    static std::optional<HexData> parse(std::string_view text) {
        auto raw = hex::decode(text);
        if (!raw) return std::nullopt;
        return HexData{std::move(*raw)};
    }

    std::string str() const { return hex::encode(bytes); }
    size_t size() const { return bytes.size(); }
    bool empty() const { return bytes.empty(); }

    friend bool operator==(const HexData&, const HexData&) = default;
};

struct Selector {
    std::array<uint8_t, 4> bytes{};

    std::string str() const { return hex::encode(bytes.data(), bytes.size()); }

    friend auto operator<=>(const Selector&, const Selector&) = default;
};

// First four bytes of the calldata; absent when the payload is too short.
inline std::optional<Selector> selector_of(const HexData& data) {
    if (data.bytes.size() < 4) return std::nullopt;
    Selector s;
    std::copy(data.bytes.begin(), data.bytes.begin() + 4, s.bytes.begin());
    return s;
}

// keccak256(signature)[0..4); the signature must be canonical (no spaces,
// no parameter names).
constexpr Selector selector_from_signature(std::string_view signature) {
    const Digest32 d = keccak256(signature);
    return Selector{{d[0], d[1], d[2], d[3]}};
}

enum class CallType : uint8_t {
    Call,
    CallCode,
    StaticCall,
    DelegateCall,
    Create,
    Create2,
    SelfDestruct,
};

// Closed enumeration: unknown strings are rejected, never coerced.
inline std::optional<CallType> parse_call_type(std::string_view text) {
    if (text == "call") return CallType::Call;
    if (text == "callcode") return CallType::CallCode;
    if (text == "staticcall") return CallType::StaticCall;
    if (text == "delegatecall") return CallType::DelegateCall;
    if (text == "create") return CallType::Create;
    if (text == "create2") return CallType::Create2;
    if (text == "suicide") return CallType::SelfDestruct;
    return std::nullopt;
}

inline std::string_view call_type_str(CallType t) {
    switch (t) {
        case CallType::Call: return "call";
        case CallType::CallCode: return "callcode";
        case CallType::StaticCall: return "staticcall";
        case CallType::DelegateCall: return "delegatecall";
        case CallType::Create: return "create";
        case CallType::Create2: return "create2";
        case CallType::SelfDestruct: return "suicide";
    }
    return "?";
}

inline bool is_message_call(CallType t) {
    return t == CallType::Call || t == CallType::CallCode || t == CallType::StaticCall ||
           t == CallType::DelegateCall;
}

inline bool is_creation(CallType t) {
    return t == CallType::Create || t == CallType::Create2;
}

// Position of a trace within its transaction; empty for the root trace.
using TraceAddress = std::vector<uint32_t>;

inline std::string trace_address_str(const TraceAddress& a) {
    std::string out;
    for (size_t i = 0; i < a.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(a[i]);
    }
    return out;
}

inline std::optional<TraceAddress> parse_trace_address(std::string_view text) {
    TraceAddress out;
    if (text.empty()) return out;
    uint64_t cur = 0;
    bool have_digit = false;
    for (const char c : text) {
        if (c == '.') {
            if (!have_digit) return std::nullopt;
            out.push_back(static_cast<uint32_t>(cur));
            cur = 0;
            have_digit = false;
        } else if (c >= '0' && c <= '9') {
            cur = cur * 10 + static_cast<uint64_t>(c - '0');
            if (cur > UINT32_MAX) return std::nullopt;
            have_digit = true;
        } else {
            return std::nullopt;
        }
    }
    if (!have_digit) return std::nullopt;
    out.push_back(static_cast<uint32_t>(cur));
    return out;
}

// One internal operation of a transaction: the atomic input unit.
struct TraceRecord {
    TxHash transaction_hash;
    TraceAddress trace_address;
    Address from;
    Address to;  // for Create*, the created contract's address
    CallType call_type = CallType::Call;
    HexData input;
    HexData output;
    BigInt gas_used;
    bool status = true;
    BigInt value;
    uint64_t block_number = 0;
    UtcSeconds block_timestamp = 0;
    std::optional<BigInt> gas_price;  // root traces only, when exported

    bool is_root() const { return trace_address.empty(); }
};

// A deployed contract as recorded in the contracts corpus.
struct ContractRecord {
    Address address;
    HexData bytecode;  // runtime bytecode; may be empty (self-destructed)
    UtcSeconds created_at = 0;
    TxHash creation_tx;
    uint64_t block_number = 0;
};

// Longest proper prefix of `addr` present in `siblings`; absent for the root.
// `Contains` is any callable TraceAddress -> bool.
template <typename Contains>
std::optional<TraceAddress> parent_of(const TraceAddress& addr, Contains&& contains) {
    if (addr.empty()) return std::nullopt;
    TraceAddress prefix(addr.begin(), addr.end() - 1);
    while (true) {
        if (contains(prefix)) return prefix;
        if (prefix.empty()) return std::nullopt;
        prefix.pop_back();
    }
}

struct AddressHash {
    size_t operator()(const Address& a) const noexcept {
        size_t h = 1469598103934665603ull;
        for (auto b : a.bytes) h = (h ^ b) * 1099511628211ull;
        return h;
    }
};

struct TxHashHash {
    size_t operator()(const TxHash& t) const noexcept {
        size_t h = 1469598103934665603ull;
        for (auto b : t.bytes) h = (h ^ b) * 1099511628211ull;
        return h;
    }
};

struct TraceAddressHash {
    size_t operator()(const TraceAddress& a) const noexcept {
        size_t h = 1469598103934665603ull;
        for (auto v : a) h = (h ^ v) * 1099511628211ull;
        return h;
    }
};

}  // namespace proxyprobe
