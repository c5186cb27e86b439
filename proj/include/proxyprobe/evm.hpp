// SPDX-License-Identifier: Apache-2.0
#pragma once

// Linear EVM bytecode scanner. PUSH immediates are skipped when advancing,
// never interpreted as opcodes; a naive byte scan would find phantom
// instructions inside pushed constants.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxyprobe/types.hpp"

namespace proxyprobe::evm {

enum Opcode : uint8_t {
    OP_STOP = 0x00,
    OP_CALLDATALOAD = 0x35,
    OP_CALLDATASIZE = 0x36,
    OP_CALLDATACOPY = 0x37,
    OP_RETURNDATASIZE = 0x3d,
    OP_RETURNDATACOPY = 0x3e,
    OP_MLOAD = 0x51,
    OP_MSTORE = 0x52,
    OP_SLOAD = 0x54,
    OP_SSTORE = 0x55,
    OP_JUMP = 0x56,
    OP_JUMPI = 0x57,
    OP_GAS = 0x5a,
    OP_JUMPDEST = 0x5b,
    OP_PUSH1 = 0x60,
    OP_PUSH4 = 0x63,
    OP_PUSH20 = 0x73,
    OP_PUSH32 = 0x7f,
    OP_DUP1 = 0x80,
    OP_SWAP1 = 0x90,
    OP_CREATE = 0xf0,
    OP_CALL = 0xf1,
    OP_CALLCODE = 0xf2,
    OP_RETURN = 0xf3,
    OP_DELEGATECALL = 0xf4,
    OP_CREATE2 = 0xf5,
    OP_STATICCALL = 0xfa,
    OP_REVERT = 0xfd,
    OP_INVALID = 0xfe,
    OP_SELFDESTRUCT = 0xff,
};

constexpr bool is_push(uint8_t op) { return op >= OP_PUSH1 && op <= OP_PUSH32; }
constexpr unsigned push_size(uint8_t op) { return is_push(op) ? op - OP_PUSH1 + 1 : 0; }
constexpr bool is_terminator(uint8_t op) {
    return op == OP_STOP || op == OP_JUMP || op == OP_RETURN || op == OP_REVERT ||
           op == OP_INVALID || op == OP_SELFDESTRUCT;
}

struct Instruction {
    size_t offset = 0;
    uint8_t opcode = 0;
    std::vector<uint8_t> immediate;  // PUSH payload; may be short at code end
    bool truncated = false;

    bool is_push() const { return evm::is_push(opcode); }
};

inline std::vector<Instruction> scan(const std::vector<uint8_t>& code) {
    std::vector<Instruction> out;
    size_t i = 0;
    while (i < code.size()) {
        Instruction ins;
        ins.offset = i;
        ins.opcode = code[i];
        ++i;
        if (is_push(ins.opcode)) {
            const unsigned n = push_size(ins.opcode);
            const size_t take = std::min<size_t>(n, code.size() - i);
            ins.immediate.assign(code.begin() + static_cast<long>(i),
                                 code.begin() + static_cast<long>(i + take));
            ins.truncated = take < n;
            i += take;
        }
        out.push_back(std::move(ins));
    }
    return out;
}

inline std::vector<Instruction> scan(const HexData& code) { return scan(code.bytes); }

// PUSH immediate zero-extended to a 32-byte big-endian word.
inline std::array<uint8_t, 32> immediate_word(const Instruction& ins) {
    std::array<uint8_t, 32> out{};
    const size_t n = std::min<size_t>(ins.immediate.size(), 32);
    for (size_t i = 0; i < n; ++i) out[32 - n + i] = ins.immediate[i];
    return out;
}

// Jump destination encoded by the PUSH, when it fits in size_t.
inline std::optional<size_t> immediate_offset(const Instruction& ins) {
    if (!ins.is_push() || ins.immediate.size() > 8) return std::nullopt;
    size_t v = 0;
    for (auto b : ins.immediate) v = (v << 8) | b;
    return v;
}

}  // namespace proxyprobe::evm
