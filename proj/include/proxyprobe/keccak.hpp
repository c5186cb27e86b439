// SPDX-License-Identifier: Apache-2.0
#pragma once

// Keccak-256 with the original 0x01 domain padding (the Ethereum variant,
// not NIST SHA3-256). constexpr so derived constants can be checked at
// compile time.

#include <array>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <type_traits>
#include <vector>

#include "proxyprobe/hex.hpp"

namespace proxyprobe {

using Digest32 = std::array<uint8_t, 32>;

namespace keccak_detail {

constexpr std::array<uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr uint64_t rotl(uint64_t v, int n) noexcept {
    return n == 0 ? v : (v << n) | (v >> (64 - n));
}

constexpr void permute(std::array<uint64_t, 25>& state) noexcept {
    uint64_t a0 = state[0], a1 = state[1], a2 = state[2], a3 = state[3], a4 = state[4];
    uint64_t a5 = state[5], a6 = state[6], a7 = state[7], a8 = state[8], a9 = state[9];
    uint64_t a10 = state[10], a11 = state[11], a12 = state[12], a13 = state[13], a14 = state[14];
    uint64_t a15 = state[15], a16 = state[16], a17 = state[17], a18 = state[18], a19 = state[19];
    uint64_t a20 = state[20], a21 = state[21], a22 = state[22], a23 = state[23], a24 = state[24];
    for (int round = 0; round < 24; ++round) {
        // theta
        const uint64_t c0 = a0 ^ a5 ^ a10 ^ a15 ^ a20;
        const uint64_t c1 = a1 ^ a6 ^ a11 ^ a16 ^ a21;
        const uint64_t c2 = a2 ^ a7 ^ a12 ^ a17 ^ a22;
        const uint64_t c3 = a3 ^ a8 ^ a13 ^ a18 ^ a23;
        const uint64_t c4 = a4 ^ a9 ^ a14 ^ a19 ^ a24;
        const uint64_t d0 = c4 ^ rotl(c1, 1);
        const uint64_t d1 = c0 ^ rotl(c2, 1);
        const uint64_t d2 = c1 ^ rotl(c3, 1);
        const uint64_t d3 = c2 ^ rotl(c4, 1);
        const uint64_t d4 = c3 ^ rotl(c0, 1);
        // theta-xor, rho and pi fused into the b lanes
        const uint64_t b0 = a0 ^ d0;
        const uint64_t b16 = rotl(a5 ^ d0, 36);
        const uint64_t b7 = rotl(a10 ^ d0, 3);
        const uint64_t b23 = rotl(a15 ^ d0, 41);
        const uint64_t b14 = rotl(a20 ^ d0, 18);
        const uint64_t b10 = rotl(a1 ^ d1, 1);
        const uint64_t b1 = rotl(a6 ^ d1, 44);
        const uint64_t b17 = rotl(a11 ^ d1, 10);
        const uint64_t b8 = rotl(a16 ^ d1, 45);
        const uint64_t b24 = rotl(a21 ^ d1, 2);
        const uint64_t b20 = rotl(a2 ^ d2, 62);
        const uint64_t b11 = rotl(a7 ^ d2, 6);
        const uint64_t b2 = rotl(a12 ^ d2, 43);
        const uint64_t b18 = rotl(a17 ^ d2, 15);
        const uint64_t b9 = rotl(a22 ^ d2, 61);
        const uint64_t b5 = rotl(a3 ^ d3, 28);
        const uint64_t b21 = rotl(a8 ^ d3, 55);
        const uint64_t b12 = rotl(a13 ^ d3, 25);
        const uint64_t b3 = rotl(a18 ^ d3, 21);
        const uint64_t b19 = rotl(a23 ^ d3, 56);
        const uint64_t b15 = rotl(a4 ^ d4, 27);
        const uint64_t b6 = rotl(a9 ^ d4, 20);
        const uint64_t b22 = rotl(a14 ^ d4, 39);
        const uint64_t b13 = rotl(a19 ^ d4, 8);
        const uint64_t b4 = rotl(a24 ^ d4, 14);
        // chi and iota
        a0 = (b0 ^ (~b1 & b2)) ^ kRoundConstants[round];
        a1 = (b1 ^ (~b2 & b3));
        a2 = (b2 ^ (~b3 & b4));
        a3 = (b3 ^ (~b4 & b0));
        a4 = (b4 ^ (~b0 & b1));
        a5 = (b5 ^ (~b6 & b7));
        a6 = (b6 ^ (~b7 & b8));
        a7 = (b7 ^ (~b8 & b9));
        a8 = (b8 ^ (~b9 & b5));
        a9 = (b9 ^ (~b5 & b6));
        a10 = (b10 ^ (~b11 & b12));
        a11 = (b11 ^ (~b12 & b13));
        a12 = (b12 ^ (~b13 & b14));
        a13 = (b13 ^ (~b14 & b10));
        a14 = (b14 ^ (~b10 & b11));
        a15 = (b15 ^ (~b16 & b17));
        a16 = (b16 ^ (~b17 & b18));
        a17 = (b17 ^ (~b18 & b19));
        a18 = (b18 ^ (~b19 & b15));
        a19 = (b19 ^ (~b15 & b16));
        a20 = (b20 ^ (~b21 & b22));
        a21 = (b21 ^ (~b22 & b23));
        a22 = (b22 ^ (~b23 & b24));
        a23 = (b23 ^ (~b24 & b20));
        a24 = (b24 ^ (~b20 & b21));

    }
    state[0] = a0; state[1] = a1; state[2] = a2; state[3] = a3; state[4] = a4;
    state[5] = a5; state[6] = a6; state[7] = a7; state[8] = a8; state[9] = a9;
    state[10] = a10; state[11] = a11; state[12] = a12; state[13] = a13; state[14] = a14;
    state[15] = a15; state[16] = a16; state[17] = a17; state[18] = a18; state[19] = a19;
    state[20] = a20; state[21] = a21; state[22] = a22; state[23] = a23; state[24] = a24;
}

constexpr size_t kRate = 136;  // 1088-bit rate for a 256-bit capacity

#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
inline constexpr bool kHostLittleEndian = true;
#else
inline constexpr bool kHostLittleEndian = false;
#endif

// Byte may be uint8_t or char; the byte-assembly path keeps constant
// evaluation legal, full blocks take the memcpy path at runtime.
template <typename Byte>
constexpr Digest32 hash(const Byte* data, size_t size) noexcept {
    std::array<uint64_t, 25> state{};
    size_t off = 0;
    while (size - off >= kRate) {
        if (kHostLittleEndian && !std::is_constant_evaluated()) {
            uint64_t lanes[kRate / 8];
            std::memcpy(lanes, data + off, kRate);
            for (size_t i = 0; i < kRate / 8; ++i) state[i] ^= lanes[i];
        } else {
            for (size_t i = 0; i < kRate / 8; ++i) {
                uint64_t lane = 0;
                for (int b = 7; b >= 0; --b)
                    lane = (lane << 8) | static_cast<uint8_t>(data[off + 8 * i + b]);
                state[i] ^= lane;
            }
        }
        permute(state);
        off += kRate;
    }
    // final block with 0x01 .. 0x80 padding
    std::array<uint8_t, kRate> block{};
    for (size_t i = 0; off + i < size; ++i) block[i] = static_cast<uint8_t>(data[off + i]);
    block[size - off] ^= 0x01;
    block[kRate - 1] ^= 0x80;
    for (size_t i = 0; i < kRate / 8; ++i) {
        uint64_t lane = 0;
        for (int b = 7; b >= 0; --b) lane = (lane << 8) | block[8 * i + b];
        state[i] ^= lane;
    }
    permute(state);

    Digest32 out{};
    for (size_t i = 0; i < 4; ++i)
        for (int b = 0; b < 8; ++b)
            out[8 * i + b] = static_cast<uint8_t>(state[i] >> (8 * b));
    return out;
}

}  // namespace keccak_detail

constexpr Digest32 keccak256(const uint8_t* data, size_t size) noexcept {
    return keccak_detail::hash(data, size);
}

constexpr Digest32 keccak256(std::string_view text) noexcept {
    return keccak_detail::hash(text.data(), text.size());
}

inline Digest32 keccak256(const std::vector<uint8_t>& data) noexcept {
    return keccak_detail::hash(data.data(), data.size());
}

inline std::string digest_hex(const Digest32& d, bool with_prefix = true) {
    return hex::encode(d.data(), d.size(), with_prefix);
}

// 256-bit big-endian decrement, used for the keccak-minus-one slot constants.
constexpr Digest32 minus_one(Digest32 word) noexcept {
    for (int i = 31; i >= 0; --i) {
        if (word[i]-- != 0) break;
    }
    return word;
}

// Incremental hasher for streams too large to buffer whole.
class Keccak256 {
  public:
    void update(const uint8_t* data, size_t size) {
        using namespace keccak_detail;
        size_t off = 0;
        if (fill_ > 0) {
            while (fill_ < kRate && off < size) buf_[fill_++] = data[off++];
            if (fill_ == kRate) {
                absorb_block(buf_.data());
                fill_ = 0;
            }
        }
        while (size - off >= kRate) {
            absorb_block(data + off);
            off += kRate;
        }
        while (off < size) buf_[fill_++] = data[off++];
    }

    void update(std::string_view text) {
        update(reinterpret_cast<const uint8_t*>(text.data()), text.size());
    }

    Digest32 finish() {
        using namespace keccak_detail;
        std::array<uint8_t, kRate> block{};
        for (size_t i = 0; i < fill_; ++i) block[i] = buf_[i];
        block[fill_] ^= 0x01;
        block[kRate - 1] ^= 0x80;
        absorb_block(block.data());
        Digest32 out{};
        for (size_t i = 0; i < 4; ++i)
            for (int b = 0; b < 8; ++b)
                out[8 * i + b] = static_cast<uint8_t>(state_[i] >> (8 * b));
        return out;
    }

  private:
    void absorb_block(const uint8_t* block) {
        using namespace keccak_detail;
        if constexpr (keccak_detail::kHostLittleEndian) {
            uint64_t lanes[kRate / 8];
            std::memcpy(lanes, block, kRate);
            for (size_t i = 0; i < kRate / 8; ++i) state_[i] ^= lanes[i];
        } else {
            for (size_t i = 0; i < kRate / 8; ++i) {
                uint64_t lane = 0;
                for (int b = 7; b >= 0; --b) lane = (lane << 8) | block[8 * i + b];
                state_[i] ^= lane;
            }
        }
        permute(state_);
    }

    std::array<uint64_t, 25> state_{};
    std::array<uint8_t, keccak_detail::kRate> buf_{};
    size_t fill_ = 0;
};

namespace keccak_detail {
// Anchors the permutation at compile time: keccak256("") and keccak256("abc").
constexpr bool self_check() {
    constexpr Digest32 empty = keccak256(std::string_view{});
    constexpr Digest32 abc = keccak256(std::string_view{"abc"});
    return empty[0] == 0xc5 && empty[1] == 0xd2 && empty[31] == 0x70 &&
           abc[0] == 0x4e && abc[1] == 0x03 && abc[31] == 0x45;
}
static_assert(self_check());
}  // namespace keccak_detail

}  // namespace proxyprobe
