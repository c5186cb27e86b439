// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference-implementation fingerprinting (bytecode match plus storage-slot
// probes through an abstract chain-state reader) and purpose classification
// (forwarder vs upgradeability) over a linear disassembly with single-step
// constant propagation.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyprobe/evm.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/keccak.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::classify {

using StorageWord = std::array<uint8_t, 32>;

// ---------------------------------------------------------------------------
// Slot catalog, derived from their preimages and checked at compile time.

namespace slots {

inline constexpr StorageWord kErc1967Impl =
    minus_one(keccak256(std::string_view{"eip1967.proxy.implementation"}));
inline constexpr StorageWord kErc1967Admin =
    minus_one(keccak256(std::string_view{"eip1967.proxy.admin"}));
inline constexpr StorageWord kErc1967Beacon =
    minus_one(keccak256(std::string_view{"eip1967.proxy.beacon"}));
inline constexpr StorageWord kOzLegacyImpl =
    keccak256(std::string_view{"org.zeppelinos.proxy.implementation"});
inline constexpr StorageWord kErc1822Proxiable = keccak256(std::string_view{"PROXIABLE"});
inline constexpr StorageWord kGnosisMasterCopy{};  // slot 0

// Truncated text forms of the derived slots: 0x3608..bc, 0xb531.., 0xa3f0..50.
static_assert(kErc1967Impl[0] == 0x36 && kErc1967Impl[1] == 0x08 && kErc1967Impl[31] == 0xbc);
static_assert(kErc1967Admin[0] == 0xb5 && kErc1967Admin[1] == 0x31);
static_assert(kErc1967Beacon[0] == 0xa3 && kErc1967Beacon[1] == 0xf0 &&
              kErc1967Beacon[31] == 0x50);

}  // namespace slots

// masterCopy() — the GnosisSafeProxy dispatch marker.
inline constexpr Selector kMasterCopySelector = selector_from_signature("masterCopy()");
// implementation() — the ERC-897 getter.
inline constexpr Selector kImplementationSelector = selector_from_signature("implementation()");
// proxyType() — exposed for callers; not part of the fingerprint ladder.
inline constexpr Selector kProxyTypeSelector = selector_from_signature("proxyType()");

static_assert(kMasterCopySelector.bytes[0] == 0xa6 && kMasterCopySelector.bytes[1] == 0x19 &&
              kMasterCopySelector.bytes[2] == 0x48 && kMasterCopySelector.bytes[3] == 0x6e);
static_assert(kImplementationSelector.bytes[0] == 0x5c && kImplementationSelector.bytes[3] == 0x1b);

// ---------------------------------------------------------------------------
// Abstract chain-state reader

struct StorageResult {
    enum class Status : uint8_t { Ok, Unavailable };
    Status status = Status::Unavailable;
    StorageWord word{};

    static StorageResult ok(StorageWord w) { return {Status::Ok, w}; }
    static StorageResult unavailable() { return {Status::Unavailable, {}}; }
};

struct CallResult {
    enum class Status : uint8_t { Ok, Reverted, Unavailable };
    Status status = Status::Unavailable;
    HexData output;

    static CallResult ok(HexData out) { return {Status::Ok, std::move(out)}; }
    static CallResult reverted() { return {Status::Reverted, {}}; }
    static CallResult unavailable() { return {Status::Unavailable, {}}; }
};

// Pure reads. Failures surface as explicit unavailability, never zero words.
class StateReader {
  public:
    virtual ~StateReader() = default;
    virtual StorageResult storage_at(const Address& addr, const StorageWord& slot) = 0;
    virtual CallResult call(const Address& addr, const HexData& calldata) = 0;
};

// Fixture-backed reader: map address -> {storage: slot->word, calls:
// calldata->returndata, bytecode}. Addresses absent from the fixture are
// unavailable; present addresses read zero for unset slots and revert on
// unmapped calldata.
class FixtureStateReader : public StateReader {
  public:
    struct Entry {
        std::map<StorageWord, StorageWord> storage;
        std::map<std::vector<uint8_t>, std::vector<uint8_t>> calls;
        std::optional<HexData> bytecode;
    };

    static FixtureStateReader from_json(const nlohmann::json& j) {
        FixtureStateReader reader;
        for (const auto& [addr_text, body] : j.items()) {
            auto addr = Address::parse(addr_text);
            if (!addr) throw DataError("bad address in state fixture: " + addr_text);
            Entry entry;
            if (body.contains("storage")) {
                for (const auto& [slot_text, word_text] : body.at("storage").items()) {
                    auto slot = hex::decode_exact<32>(slot_text);
                    auto word = hex::decode_exact<32>(word_text.get<std::string>());
                    if (!slot || !word) throw DataError("bad storage entry in state fixture");
                    entry.storage.emplace(*slot, *word);
                }
            }
            if (body.contains("calls")) {
                for (const auto& [calldata_text, ret_text] : body.at("calls").items()) {
                    auto calldata = hex::decode(calldata_text);
                    auto ret = hex::decode(ret_text.get<std::string>());
                    if (!calldata || !ret) throw DataError("bad call entry in state fixture");
                    entry.calls.emplace(std::move(*calldata), std::move(*ret));
                }
            }
            if (body.contains("bytecode")) {
                auto code = HexData::parse(body.at("bytecode").get<std::string>());
                if (!code) throw DataError("bad bytecode in state fixture");
                entry.bytecode = std::move(*code);
            }
            reader.entries_.emplace(*addr, std::move(entry));
        }
        return reader;
    }

    static FixtureStateReader load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_file(path)));
    }

    StorageResult storage_at(const Address& addr, const StorageWord& slot) override {
        auto it = entries_.find(addr);
        if (it == entries_.end()) return StorageResult::unavailable();
        auto slot_it = it->second.storage.find(slot);
        return StorageResult::ok(slot_it == it->second.storage.end() ? StorageWord{}
                                                                     : slot_it->second);
    }

    CallResult call(const Address& addr, const HexData& calldata) override {
        auto it = entries_.find(addr);
        if (it == entries_.end()) return CallResult::unavailable();
        auto call_it = it->second.calls.find(calldata.bytes);
        if (call_it == it->second.calls.end()) return CallResult::reverted();
        return CallResult::ok(HexData{call_it->second});
    }

    std::optional<HexData> bytecode_of(const Address& addr) const {
        auto it = entries_.find(addr);
        if (it == entries_.end() || !it->second.bytecode) return std::nullopt;
        return it->second.bytecode;
    }

  private:
    std::map<Address, Entry> entries_;
};

// ---------------------------------------------------------------------------
// ERC-1167 minimal proxy: exactly prefix . 20 target bytes . suffix.

inline constexpr std::array<uint8_t, 10> kMinimalProxyPrefix = {0x36, 0x3d, 0x3d, 0x37, 0x3d,
                                                                0x3d, 0x3d, 0x36, 0x3d, 0x73};
inline constexpr std::array<uint8_t, 15> kMinimalProxySuffix = {
    0x5a, 0xf4, 0x3d, 0x82, 0x80, 0x3e, 0x90, 0x3d, 0x91, 0x60, 0x2b, 0x57, 0xfd, 0x5b, 0xf3};

inline std::optional<Address> detect_erc1167(const HexData& bytecode) {
    const auto& code = bytecode.bytes;
    if (code.size() != kMinimalProxyPrefix.size() + 20 + kMinimalProxySuffix.size())
        return std::nullopt;
    if (!std::equal(kMinimalProxyPrefix.begin(), kMinimalProxyPrefix.end(), code.begin()))
        return std::nullopt;
    if (!std::equal(kMinimalProxySuffix.begin(), kMinimalProxySuffix.end(), code.end() - 15))
        return std::nullopt;
    Address target;
    std::copy(code.begin() + 10, code.begin() + 30, target.bytes.begin());
    return target;
}

// ---------------------------------------------------------------------------
// Reference-implementation fingerprint

enum class ImplKind : uint8_t {
    Erc1167Minimal,
    Erc897,
    Erc1967,
    Erc1967Beacon,
    Erc1822Uups,
    OpenZeppelinLegacy,
    GnosisSafeProxy,
    Customized,
};

inline std::string_view impl_kind_str(ImplKind k) {
    switch (k) {
        case ImplKind::Erc1167Minimal: return "erc1167_minimal";
        case ImplKind::Erc897: return "erc897";
        case ImplKind::Erc1967: return "erc1967";
        case ImplKind::Erc1967Beacon: return "erc1967_beacon";
        case ImplKind::Erc1822Uups: return "erc1822_uups";
        case ImplKind::OpenZeppelinLegacy: return "openzeppelin_legacy";
        case ImplKind::GnosisSafeProxy: return "gnosis_safe";
        case ImplKind::Customized: return "customized";
    }
    return "?";
}

struct FingerprintResult {
    enum class Status : uint8_t { Classified, Deferred };
    Status status = Status::Deferred;
    ImplKind kind = ImplKind::Customized;
    std::string evidence;        // matched bytes or slot
    std::string deferred_probe;  // which probe was unavailable

    static FingerprintResult classified(ImplKind k, std::string ev) {
        return {Status::Classified, k, std::move(ev), {}};
    }
    static FingerprintResult deferred(std::string probe) {
        return {Status::Deferred, ImplKind::Customized, {}, std::move(probe)};
    }
};

inline bool word_is_zero(const StorageWord& w) {
    for (auto b : w)
        if (b != 0) return false;
    return true;
}

// Word shaped like an ABI-encoded address: 12 zero bytes then a nonzero tail.
inline std::optional<Address> word_as_address(const StorageWord& w) {
    for (size_t i = 0; i < 12; ++i)
        if (w[i] != 0) return std::nullopt;
    Address a;
    std::copy(w.begin() + 12, w.end(), a.bytes.begin());
    if (a.is_zero()) return std::nullopt;
    return a;
}

inline bool has_push4(const std::vector<evm::Instruction>& instrs, const Selector& sel) {
    for (const auto& ins : instrs) {
        if (ins.opcode != evm::OP_PUSH4 || ins.immediate.size() != 4) continue;
        if (std::equal(sel.bytes.begin(), sel.bytes.end(), ins.immediate.begin())) return true;
    }
    return false;
}

inline std::string slot_hex(const StorageWord& slot) {
    return hex::encode(slot.data(), slot.size());
}

// Decision ladder, first hit wins. An unavailable reader defers the
// classification instead of defaulting to Customized.
inline FingerprintResult fingerprint(const Address& addr, const HexData& bytecode,
                                     StateReader& reader) {
    // (1) bytecode match before slot probes; 1167 clones own no storage.
    if (auto target = detect_erc1167(bytecode))
        return FingerprintResult::classified(
            ImplKind::Erc1167Minimal, "minimal proxy runtime, target " + target->str());

    struct SlotProbe {
        const StorageWord& slot;
        ImplKind kind;
        const char* name;
    };
    const SlotProbe probes[] = {
        {slots::kErc1967Impl, ImplKind::Erc1967, "erc1967 implementation"},
        {slots::kErc1967Beacon, ImplKind::Erc1967Beacon, "erc1967 beacon"},
        {slots::kErc1822Proxiable, ImplKind::Erc1822Uups, "erc1822 proxiable"},
        {slots::kOzLegacyImpl, ImplKind::OpenZeppelinLegacy, "zeppelinos implementation"},
    };
    for (const auto& probe : probes) {  // (2)..(5)
        const StorageResult r = reader.storage_at(addr, probe.slot);
        if (r.status == StorageResult::Status::Unavailable)
            return FingerprintResult::deferred(probe.name);
        if (!word_is_zero(r.word))
            return FingerprintResult::classified(
                probe.kind, std::string(probe.name) + " slot " + slot_hex(probe.slot) + " = " +
                                slot_hex(r.word));
    }

    // (6) slot 0 holds an address and the bytecode dispatches masterCopy().
    {
        const StorageResult r = reader.storage_at(addr, slots::kGnosisMasterCopy);
        if (r.status == StorageResult::Status::Unavailable)
            return FingerprintResult::deferred("slot 0");
        const auto master = word_as_address(r.word);
        if (master && has_push4(evm::scan(bytecode), kMasterCopySelector))
            return FingerprintResult::classified(
                ImplKind::GnosisSafeProxy, "slot 0 = " + master->str() + ", masterCopy marker");
    }

    // (7) implementation() answers with a nonzero address.
    {
        HexData calldata;
        calldata.bytes.assign(kImplementationSelector.bytes.begin(),
                              kImplementationSelector.bytes.end());
        const CallResult r = reader.call(addr, calldata);
        if (r.status == CallResult::Status::Unavailable)
            return FingerprintResult::deferred("implementation() call");
        if (r.status == CallResult::Status::Ok && r.output.size() >= 32) {
            StorageWord word{};
            std::copy(r.output.bytes.begin(), r.output.bytes.begin() + 32, word.begin());
            if (auto impl = word_as_address(word))
                return FingerprintResult::classified(ImplKind::Erc897,
                                                     "implementation() = " + impl->str());
        }
    }

    return FingerprintResult::classified(ImplKind::Customized,  // (8)
                                         "no reference implementation matched");
}

// ---------------------------------------------------------------------------
// Purpose classification (forwarder vs upgradeability)

enum class Purpose : uint8_t { Forwarder, Upgradeability, Unknown };

inline std::string_view purpose_str(Purpose p) {
    switch (p) {
        case Purpose::Forwarder: return "forwarder";
        case Purpose::Upgradeability: return "upgradeability";
        case Purpose::Unknown: return "unknown";
    }
    return "?";
}

struct PurposeVerdict {
    Purpose purpose = Purpose::Unknown;
    std::vector<std::string> evidence;     // analysis steps taken, in order
    std::string stall;                     // set when purpose == Unknown
    std::optional<size_t> sstore_offset;   // byte offset of the update site
};

using CodeOf = std::function<std::optional<HexData>(const Address&)>;

namespace detail {

// Offset of the first SSTORE whose slot is a PUSH immediately before it.
inline std::optional<size_t> sstore_to_slot(const std::vector<evm::Instruction>& instrs,
                                            const StorageWord& slot) {
    for (size_t i = 1; i < instrs.size(); ++i) {
        if (instrs[i].opcode != evm::OP_SSTORE) continue;
        const auto& prev = instrs[i - 1];
        if (!prev.is_push() || prev.truncated) continue;
        if (evm::immediate_word(prev) == slot) return instrs[i].offset;
    }
    return std::nullopt;
}

// Nearest previous instruction with an opcode in `set`.
inline std::optional<size_t> nearest_before(const std::vector<evm::Instruction>& instrs,
                                            size_t site, std::initializer_list<uint8_t> set) {
    for (size_t i = site; i-- > 0;) {
        for (const uint8_t op : set)
            if (instrs[i].opcode == op) return i;
    }
    return std::nullopt;
}

// Instruction range of the function dispatched by `sel` inside `instrs`:
// PUSH4 sel ... PUSHn dest JUMPI, then from the JUMPDEST at dest up to the
// first terminator.
inline std::optional<std::pair<size_t, size_t>> dispatch_region(
    const std::vector<evm::Instruction>& instrs, const Selector& sel) {
    for (size_t i = 0; i < instrs.size(); ++i) {
        const auto& ins = instrs[i];
        if (ins.opcode != evm::OP_PUSH4 || ins.immediate.size() != 4) continue;
        if (!std::equal(sel.bytes.begin(), sel.bytes.end(), ins.immediate.begin())) continue;
        // jump target pushed within the next few instructions
        std::optional<size_t> dest;
        for (size_t j = i + 1; j < instrs.size() && j <= i + 6; ++j) {
            if (instrs[j].opcode == evm::OP_JUMPI) break;
            if (instrs[j].is_push() && j + 1 < instrs.size() &&
                instrs[j + 1].opcode == evm::OP_JUMPI) {
                dest = evm::immediate_offset(instrs[j]);
                break;
            }
        }
        if (!dest) continue;
        // locate the JUMPDEST instruction at that byte offset
        size_t begin = instrs.size();
        for (size_t j = 0; j < instrs.size(); ++j) {
            if (instrs[j].offset == *dest && instrs[j].opcode == evm::OP_JUMPDEST) {
                begin = j;
                break;
            }
        }
        if (begin == instrs.size()) continue;
        size_t end = begin + 1;
        while (end < instrs.size() && !evm::is_terminator(instrs[end].opcode)) ++end;
        return std::make_pair(begin, end);
    }
    return std::nullopt;
}

}  // namespace detail

// Approximates the manual workflow over a linear disassembly: resolve where
// each delegatecall's target comes from (hard-coded push, storage slot, or
// an external getter call) and look for a matching update site.
inline PurposeVerdict classify_purpose(const Address& proxy_addr, const HexData& proxy_code,
                                       const std::vector<std::pair<Address, HexData>>& logics,
                                       StateReader& reader, const CodeOf& code_of) {
    PurposeVerdict verdict;
    if (proxy_code.empty()) {
        verdict.stall = "step 1: proxy bytecode is empty";
        return verdict;
    }
    const auto instrs = evm::scan(proxy_code.bytes);
    std::vector<size_t> sites;
    for (size_t i = 0; i < instrs.size(); ++i)
        if (instrs[i].opcode == evm::OP_DELEGATECALL) sites.push_back(i);
    if (sites.empty()) {
        verdict.stall = "step 2: no delegatecall in proxy bytecode";
        return verdict;
    }

    std::string first_stall;
    for (const size_t site : sites) {
        PurposeVerdict attempt;
        const auto producer = detail::nearest_before(
            instrs, site, {evm::OP_PUSH20, evm::OP_SLOAD, evm::OP_STATICCALL, evm::OP_CALL});
        if (!producer) {
            if (first_stall.empty()) first_stall = "step 2: delegation target source not found";
            continue;
        }
        const auto& src = instrs[*producer];

        if (src.opcode == evm::OP_PUSH20) {
            // step 3: hard-coded reference
            attempt.purpose = Purpose::Forwarder;
            attempt.evidence.push_back("step 3: hard-coded target at offset " +
                                       std::to_string(src.offset));
            return attempt;
        }

        if (src.opcode == evm::OP_SLOAD) {
            if (*producer == 0 || !instrs[*producer - 1].is_push() ||
                instrs[*producer - 1].truncated) {
                if (first_stall.empty())
                    first_stall = "step 4: delegation slot is not a push constant";
                continue;
            }
            const StorageWord slot = evm::immediate_word(instrs[*producer - 1]);
            attempt.evidence.push_back("step 4: target read from storage slot " +
                                       slot_hex(slot));
            // step 5: update function in the proxy itself
            if (auto off = detail::sstore_to_slot(instrs, slot)) {
                attempt.purpose = Purpose::Upgradeability;
                attempt.sstore_offset = off;
                attempt.evidence.push_back("step 5: proxy sstore to slot at offset " +
                                           std::to_string(*off));
                return attempt;
            }
            attempt.evidence.push_back("step 5: no sstore to slot in proxy");
            // steps 6-7: update function delegated to a logic contract
            for (const auto& [logic_addr, logic_code] : logics) {
                if (logic_code.empty()) continue;
                const auto logic_instrs = evm::scan(logic_code.bytes);
                if (auto off = detail::sstore_to_slot(logic_instrs, slot)) {
                    attempt.purpose = Purpose::Upgradeability;
                    attempt.sstore_offset = off;
                    attempt.evidence.push_back("step 7: logic " + logic_addr.str() +
                                               " sstore to slot at offset " +
                                               std::to_string(*off));
                    return attempt;
                }
            }
            attempt.purpose = Purpose::Forwarder;
            attempt.evidence.push_back("step 7: no update site in proxy or logic");
            return attempt;
        }

        // STATICCALL / CALL: target comes from an external getter (steps 8-10)
        attempt.evidence.push_back("step 8: target from external call at offset " +
                                   std::to_string(src.offset));
        // callee address: nearest push20 or constant-slot sload before the call
        std::optional<Address> callee;
        const auto callee_src =
            detail::nearest_before(instrs, *producer, {evm::OP_PUSH20, evm::OP_SLOAD});
        if (callee_src && instrs[*callee_src].opcode == evm::OP_PUSH20 &&
            instrs[*callee_src].immediate.size() == 20) {
            Address a;
            std::copy(instrs[*callee_src].immediate.begin(), instrs[*callee_src].immediate.end(),
                      a.bytes.begin());
            callee = a;
        } else if (callee_src && instrs[*callee_src].opcode == evm::OP_SLOAD &&
                   *callee_src > 0 && instrs[*callee_src - 1].is_push()) {
            const StorageWord slot = evm::immediate_word(instrs[*callee_src - 1]);
            const StorageResult r = reader.storage_at(proxy_addr, slot);
            if (r.status == StorageResult::Status::Unavailable) {
                if (first_stall.empty())
                    first_stall = "step 8: callee address unavailable (reader)";
                continue;
            }
            callee = word_as_address(r.word);
        }
        if (!callee) {
            if (first_stall.empty()) first_stall = "step 8: callee address unresolved";
            continue;
        }
        // getter selector: nearest push4 before the call
        const auto sel_idx = detail::nearest_before(instrs, *producer, {evm::OP_PUSH4});
        if (!sel_idx || instrs[*sel_idx].immediate.size() != 4) {
            if (first_stall.empty()) first_stall = "step 8: getter selector not found";
            continue;
        }
        Selector getter;
        std::copy(instrs[*sel_idx].immediate.begin(), instrs[*sel_idx].immediate.end(),
                  getter.bytes.begin());
        attempt.evidence.push_back("step 8: callee " + callee->str() + " getter " +
                                   getter.str());

        const auto callee_code = code_of(*callee);
        if (!callee_code || callee_code->empty()) {
            if (first_stall.empty()) first_stall = "step 9: callee bytecode missing";
            continue;
        }
        const auto callee_instrs = evm::scan(callee_code->bytes);
        const auto region = detail::dispatch_region(callee_instrs, getter);
        if (!region) {
            if (first_stall.empty()) first_stall = "step 9: getter dispatch not found in callee";
            continue;
        }
        // the slot the getter reads
        std::optional<StorageWord> getter_slot;
        for (size_t j = region->first + 1; j < region->second; ++j) {
            if (callee_instrs[j].opcode != evm::OP_SLOAD) continue;
            if (callee_instrs[j - 1].is_push() && !callee_instrs[j - 1].truncated) {
                getter_slot = evm::immediate_word(callee_instrs[j - 1]);
                break;
            }
        }
        if (!getter_slot) {
            if (first_stall.empty()) first_stall = "step 10: getter storage slot unresolved";
            continue;
        }
        attempt.evidence.push_back("step 10: getter reads slot " + slot_hex(*getter_slot));
        if (auto off = detail::sstore_to_slot(callee_instrs, *getter_slot)) {
            attempt.purpose = Purpose::Upgradeability;
            attempt.sstore_offset = off;
            attempt.evidence.push_back("step 10: callee sstore to slot at offset " +
                                       std::to_string(*off));
            return attempt;
        }
        attempt.purpose = Purpose::Forwarder;
        attempt.evidence.push_back("step 10: callee has no update site");
        return attempt;
    }

    verdict.stall = first_stall.empty() ? "step 2: no analyzable delegatecall site" : first_stall;
    verdict.evidence.push_back(verdict.stall);
    return verdict;
}

}  // namespace proxyprobe::classify
