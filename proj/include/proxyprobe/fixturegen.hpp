// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic synthetic corpus generator. Plants active and inactive
// proxies, non-proxies with adversarial delegate traffic, every requested
// creational pattern, per-kind classifier fixtures with a matching state
// file, and monthly traffic with recorded ground truth. Identical seeds
// produce byte-identical corpora.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyprobe/classify.hpp"
#include "proxyprobe/evm.hpp"
#include "proxyprobe/ingest.hpp"
#include "proxyprobe/jsonl.hpp"
#include "proxyprobe/keccak.hpp"
#include "proxyprobe/types.hpp"

namespace proxyprobe::fixturegen {

namespace fs = std::filesystem;

inline const std::vector<std::string> kAllPatterns = {
    "EOA > P",
    "EOA > FA > P",
    "EOA > PF > P",
    "EOA > FA > FA > P",
    "EOA > FA > FA > FA > FA > P",
    "EOA > FA > PF > P",
    "EOA > PF > PF > P",
    "EOA > FA > PF > PF > P",
    "EOA > FA > FA > FA > P",
    "EOA > FA > FA > PF > P",
    "EOA > FA > FA > PF > PF > P",
    "EOA > FA > FA > PF > PF > PF > P",
};

struct Spec {
    uint64_t seed = 42;
    uint64_t target_transactions = 1000;
    unsigned active_proxies = 20;
    unsigned inactive_proxies = 9;
    unsigned non_proxies = 80;
    std::vector<std::string> patterns = kAllPatterns;
    unsigned months = 12;
    uint64_t stress_records = 0;  // when set, generate the stress corpus only
};

// Parses "EOA > FA > PF > P" into intermediary labels; rejects malformed or
// infeasible shapes (depth beyond the chain-walk cap).
inline std::vector<std::string> parse_pattern(const std::string& signature) {
    std::vector<std::string> labels;
    size_t pos = 0;
    while (pos <= signature.size()) {
        size_t sep = signature.find(" > ", pos);
        if (sep == std::string::npos) {
            labels.push_back(signature.substr(pos));
            break;
        }
        labels.push_back(signature.substr(pos, sep - pos));
        pos = sep + 3;
    }
    if (labels.size() < 2 || labels.front() != "EOA" || labels.back() != "P")
        throw DataError("bad pattern signature: " + signature);
    for (size_t i = 1; i + 1 < labels.size(); ++i)
        if (labels[i] != "FA" && labels[i] != "PF")
            throw DataError("bad pattern label in: " + signature);
    if (labels.size() > 32) throw DataError("pattern depth > 32 is infeasible: " + signature);
    return labels;
}

// splitmix64: deterministic across platforms, unlike std distributions.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  private:
    uint64_t state_;
};

// ---------------------------------------------------------------------------
// Tiny assembler for classifier bytecodes

struct Asm {
    std::vector<uint8_t> code;

    Asm& op(uint8_t opcode) {
        code.push_back(opcode);
        return *this;
    }
    Asm& push(const std::vector<uint8_t>& imm) {
        code.push_back(static_cast<uint8_t>(evm::OP_PUSH1 + imm.size() - 1));
        code.insert(code.end(), imm.begin(), imm.end());
        return *this;
    }
    Asm& push_u8(uint8_t v) { return push({v}); }
    Asm& push_word(const classify::StorageWord& w) {
        return push(std::vector<uint8_t>(w.begin(), w.end()));
    }
    Asm& push_addr(const Address& a) {
        return push(std::vector<uint8_t>(a.bytes.begin(), a.bytes.end()));
    }
    Asm& push_sel(const Selector& s) {
        return push(std::vector<uint8_t>(s.bytes.begin(), s.bytes.end()));
    }
    // PUSH2 placeholder for a jump target, backpatched later.
    size_t push_dest_placeholder() {
        code.push_back(evm::OP_PUSH1 + 1);
        const size_t at = code.size();
        code.push_back(0);
        code.push_back(0);
        return at;
    }
    void patch_dest(size_t at, size_t dest) {
        code[at] = static_cast<uint8_t>(dest >> 8);
        code[at + 1] = static_cast<uint8_t>(dest & 0xff);
    }
    size_t here() const { return code.size(); }
};

// Fallback that loads the target from `slot` and delegates; optionally an
// update section that stores to the same slot, and an optional leading
// PUSH4 marker (dispatch noise / the Gnosis masterCopy marker).
inline std::vector<uint8_t> slot_proxy_code(const classify::StorageWord& slot, bool with_update,
                                            const std::optional<Selector>& marker = std::nullopt,
                                            uint32_t tag = 0) {
    Asm a;
    if (marker) a.push_sel(*marker).op(evm::OP_JUMPDEST);
    if (tag != 0) {  // distinct bytecode per tag
        a.push({static_cast<uint8_t>(tag >> 24), static_cast<uint8_t>(tag >> 16),
                static_cast<uint8_t>(tag >> 8), static_cast<uint8_t>(tag)});
        a.op(0x50);  // POP
    }
    a.op(evm::OP_CALLDATASIZE).push_u8(0).push_u8(0).op(evm::OP_CALLDATACOPY);
    a.push_word(slot).op(evm::OP_SLOAD);
    a.op(evm::OP_GAS).op(evm::OP_DELEGATECALL);
    a.op(evm::OP_STOP);
    if (with_update) {
        a.op(evm::OP_JUMPDEST);
        a.push_word(slot).op(evm::OP_SSTORE);
        a.op(evm::OP_STOP);
    }
    return a.code;
}

// Hard-coded forwarder: PUSH20 target ... DELEGATECALL.
inline std::vector<uint8_t> hardcoded_proxy_code(const Address& target, uint32_t tag = 0) {
    Asm a;
    if (tag != 0) {
        a.push({static_cast<uint8_t>(tag >> 24), static_cast<uint8_t>(tag >> 16),
                static_cast<uint8_t>(tag >> 8), static_cast<uint8_t>(tag)});
        a.op(0x50);
    }
    a.op(evm::OP_CALLDATASIZE).push_u8(0).push_u8(0).op(evm::OP_CALLDATACOPY);
    a.push_addr(target);
    a.op(evm::OP_GAS).op(evm::OP_DELEGATECALL);
    a.op(evm::OP_STOP);
    return a.code;
}

// Beacon-style proxy: beacon address from `beacon_slot`, getter selector
// staticcalled, returned word delegated to.
inline std::vector<uint8_t> beacon_proxy_code(const classify::StorageWord& beacon_slot,
                                              const Selector& getter) {
    Asm a;
    a.push_word(beacon_slot).op(evm::OP_SLOAD);
    a.push_sel(getter).push_u8(0).op(evm::OP_MSTORE);
    a.op(evm::OP_GAS).op(evm::OP_STATICCALL);
    a.push_u8(0).op(evm::OP_MLOAD);
    a.op(evm::OP_GAS).op(evm::OP_DELEGATECALL);
    a.op(evm::OP_STOP);
    return a.code;
}

// Callee with a real dispatch: PUSH4 getter, PUSH2 dest, JUMPI; the getter
// region reads `slot`; an update section stores to it when upgradeable.
inline std::vector<uint8_t> getter_callee_code(const Selector& getter, uint8_t slot,
                                               bool with_update) {
    Asm a;
    a.push_sel(getter);
    const size_t placeholder = a.push_dest_placeholder();
    a.op(evm::OP_JUMPI);
    if (with_update) {
        a.push_u8(slot).op(evm::OP_SSTORE);
    }
    a.op(evm::OP_STOP);
    const size_t dest = a.here();
    a.op(evm::OP_JUMPDEST);
    a.push_u8(slot).op(evm::OP_SLOAD);
    a.push_u8(0).op(evm::OP_MSTORE);
    a.push_u8(32).push_u8(0).op(evm::OP_RETURN);
    a.patch_dest(placeholder, dest);
    return a.code;
}

// ERC-1167 minimal proxy runtime for a target.
inline std::vector<uint8_t> minimal_proxy_code(const Address& target) {
    std::vector<uint8_t> code(classify::kMinimalProxyPrefix.begin(),
                              classify::kMinimalProxyPrefix.end());
    code.insert(code.end(), target.bytes.begin(), target.bytes.end());
    code.insert(code.end(), classify::kMinimalProxySuffix.begin(),
                classify::kMinimalProxySuffix.end());
    return code;
}

// Adversarial: the SSTORE byte sequence lives inside a PUSH immediate; an
// instruction-level scan must not see an update site.
inline std::vector<uint8_t> adversarial_proxy_code() {
    Asm a;
    a.push({0x60, 0x00, 0x55});  // looks like PUSH1 00 SSTORE to a byte scanner
    a.op(0x50);                  // POP
    a.push_u8(0).op(evm::OP_SLOAD);
    a.op(evm::OP_GAS).op(evm::OP_DELEGATECALL);
    a.op(evm::OP_STOP);
    return a.code;
}

// Plain unique non-proxy runtime.
inline std::vector<uint8_t> filler_code(uint32_t tag) {
    Asm a;
    a.push({static_cast<uint8_t>(tag >> 24), static_cast<uint8_t>(tag >> 16),
            static_cast<uint8_t>(tag >> 8), static_cast<uint8_t>(tag)});
    a.op(0x50).op(evm::OP_STOP);
    return a.code;
}

// ---------------------------------------------------------------------------
// Generator

class Generator {
  public:
    explicit Generator(Spec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
        for (const auto& signature : spec_.patterns) parse_pattern(signature);  // validate
    }

    void run(const std::string& out_dir) {
        fs::create_directories(out_dir);
        if (spec_.stress_records > 0) {
            build_stress();
        } else {
            build_default();
        }
        write(out_dir);
    }

  private:
    // -- identity helpers ---------------------------------------------------

    Address make_address(const std::string& tag) {
        const auto d = keccak256("proxyprobe/" + std::to_string(spec_.seed) + "/addr/" + tag);
        Address a;
        std::copy(d.begin(), d.begin() + 20, a.bytes.begin());
        return a;
    }

    TxHash make_tx_hash() {
        const auto d = keccak256("proxyprobe/" + std::to_string(spec_.seed) + "/tx/" +
                                 std::to_string(tx_counter_));
        TxHash h;
        std::copy(d.begin(), d.end(), h.bytes.begin());
        return h;
    }

    Selector make_selector(const std::string& tag) {
        return selector_from_signature(tag + "_" + std::to_string(spec_.seed) + "()");
    }

    UtcSeconds month_timestamp(unsigned month_idx, uint64_t salt) {
        const int year = 2021 + static_cast<int>(month_idx / 12);
        const unsigned month = 1 + month_idx % 12;
        return utc_from_civil(year, month, 1) + static_cast<int64_t>((salt * 797) % (27 * 86400));
    }

    // -- transaction scaffolding ---------------------------------------------

    struct Tx {
        TxHash hash;
        uint64_t block;
        UtcSeconds timestamp;
        std::vector<TraceRecord> traces;
    };

    Tx begin_tx(unsigned month_idx) {
        Tx tx;
        tx.hash = make_tx_hash();
        tx.block = next_block_++;
        tx.timestamp = month_timestamp(month_idx, tx_counter_);
        ++tx_counter_;
        return tx;
    }

    TraceRecord& add_trace(Tx& tx, TraceAddress addr, const Address& from, const Address& to,
                           CallType type, HexData input, uint64_t gas) {
        TraceRecord t;
        t.transaction_hash = tx.hash;
        t.trace_address = std::move(addr);
        t.from = from;
        t.to = to;
        t.call_type = type;
        t.input = std::move(input);
        t.gas_used = gas;
        t.status = true;
        t.value = 0;
        t.block_number = tx.block;
        t.block_timestamp = tx.timestamp;
        if (t.trace_address.empty()) t.gas_price = BigInt(10'000'000'000ull);  // 10 gwei
        tx.traces.push_back(std::move(t));
        return tx.traces.back();
    }

    void finish_tx(Tx& tx) {
        for (auto& t : tx.traces) traces_.push_back(std::move(t));
    }

    // Tallies the planted monthly ground truth once every contract and proxy
    // registration is final. Traces of one transaction are contiguous in
    // emission order.
    void compute_monthly_tallies() {
        monthly_.clear();
        size_t i = 0;
        while (i < traces_.size()) {
            size_t j = i;
            while (j < traces_.size() &&
                   traces_[j].transaction_hash == traces_[i].transaction_hash)
                ++j;
            auto& tally = monthly_[Month::of(traces_[i].block_timestamp)];
            ++tally.txs;
            bool multi = false;
            bool types[7] = {};
            bool touch = false;
            for (size_t k = i; k < j; ++k) {
                const auto& t = traces_[k];
                types[static_cast<int>(t.call_type)] = true;
                if (!t.is_root() && is_message_call(t.call_type) && t.from != t.to &&
                    contract_registry_.count(t.from) && contract_registry_.count(t.to))
                    multi = true;
                if (is_message_call(t.call_type) && expected_detected_.count(t.to)) touch = true;
                if (t.call_type == CallType::DelegateCall && expected_detected_.count(t.from))
                    touch = true;
            }
            if (multi) {
                ++tally.multi;
                for (int k = 0; k < 7; ++k)
                    if (types[k]) ++tally.multi_by_type[k];
            }
            if (touch) {
                ++tally.proxy_touch;
                if (multi) ++tally.proxy_touch_multi;
            }
            i = j;
        }
    }

    void register_contract(const Address& addr, std::vector<uint8_t> code, const Tx& creation_tx) {
        ContractRecord rec;
        rec.address = addr;
        rec.bytecode = HexData{std::move(code)};
        rec.created_at = creation_tx.timestamp;
        rec.creation_tx = creation_tx.hash;
        rec.block_number = creation_tx.block;
        contracts_.push_back(std::move(rec));
        contract_registry_.insert(addr);
    }

    // Deploy `addr` directly from an EOA (root create trace).
    Tx deploy_direct(const Address& eoa, const Address& addr, std::vector<uint8_t> code,
                     unsigned month_idx, uint64_t gas) {
        Tx tx = begin_tx(month_idx);
        HexData initcode;
        initcode.bytes = {0x60, 0x0b, 0x59, 0x81, 0x38, 0x03, 0x80, 0x92};  // synthetic
        add_trace(tx, {}, eoa, addr, CallType::Create, initcode, gas);
        register_contract(addr, std::move(code), tx);
        finish_tx(tx);
        return tx;
    }

    // Deploy `addr` through a factory: EOA calls the factory, the factory
    // creates. When the factory is a planted proxy, the create happens under
    // a delegatecall to its logic, which also confirms the factory.
    Tx deploy_via(const Address& eoa, const Address& factory, bool factory_is_proxy,
                  const Address& factory_logic, const Address& addr, std::vector<uint8_t> code,
                  unsigned month_idx, uint64_t gas) {
        Tx tx = begin_tx(month_idx);
        const Selector deploy_sel = make_selector("deploy");
        HexData calldata;
        calldata.bytes.assign(deploy_sel.bytes.begin(), deploy_sel.bytes.end());
        add_trace(tx, {}, eoa, factory, CallType::Call, calldata, 60'000);
        HexData initcode;
        initcode.bytes = {0x58, 0x58, 0x58, 0x58};
        if (factory_is_proxy) {
            add_trace(tx, {0}, factory, factory_logic, CallType::DelegateCall, calldata, 50'000);
            add_trace(tx, {0, 0}, factory, addr, CallType::Create, initcode, gas);
        } else {
            add_trace(tx, {0}, factory, addr, CallType::Create, initcode, gas);
        }
        register_contract(addr, std::move(code), tx);
        finish_tx(tx);
        return tx;
    }

    // One forwarding use: EOA calls the proxy, the proxy delegates the same
    // selector to its logic.
    void use_proxy(const Address& eoa, const Address& proxy, const Address& logic,
                   const Selector& sel, unsigned month_idx) {
        Tx tx = begin_tx(month_idx);
        HexData calldata;
        calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
        for (int i = 0; i < 8; ++i) calldata.bytes.push_back(static_cast<uint8_t>(rng_.below(256)));
        add_trace(tx, {}, eoa, proxy, CallType::Call, calldata, 40'000);
        add_trace(tx, {0}, proxy, logic, CallType::DelegateCall, calldata, 30'000);
        finish_tx(tx);
        logic_map_[proxy].insert(logic);
    }

    // -- default corpus -------------------------------------------------------

    void build_default() {
        const unsigned months = std::max(1u, spec_.months);
        std::vector<Address> eoas;
        for (unsigned i = 0; i < 40; ++i) eoas.push_back(make_address("eoa" + std::to_string(i)));
        auto eoa_at = [&](uint64_t i) { return eoas[i % eoas.size()]; };

        // --- detection cohort: active proxies -------------------------------
        std::vector<Address> actives, inactives, others;
        {
            // 0..half: direct deploys, unique bytecode, own logic (singleton
            // contexts, off-chain style)
            const unsigned direct = spec_.active_proxies / 2;
            for (unsigned i = 0; i < direct; ++i) {
                const Address proxy = make_address("active" + std::to_string(i));
                const Address logic = make_address("active_logic" + std::to_string(i));
                const Address eoa = eoa_at(i);
                deploy_direct(eoa, logic, filler_code(0x10000 + i), i % months, 90'000);
                deploy_direct(eoa, proxy,
                              slot_proxy_code(classify::slots::kErc1967Impl, false, std::nullopt,
                                              0x20000 + i),
                              i % months, 100'000 + i * 10);
                const Selector sel = make_selector("use" + std::to_string(i));
                use_proxy(eoa_at(i + 7), proxy, logic, sel, (i + 1) % months);
                use_proxy(eoa_at(i + 9), proxy, logic, sel, (i + 3) % months);
                actives.push_back(proxy);
            }
            // the rest: one factory deploys clones with identical bytecode
            // sharing one logic (a single large on-chain context)
            if (direct < spec_.active_proxies) {
                const Address factory = make_address("clone_factory");
                const Address shared_logic = make_address("shared_logic");
                deploy_direct(eoa_at(0), factory, filler_code(0x31337), 0, 1'000'000);
                deploy_direct(eoa_at(0), shared_logic, filler_code(0x31338), 0, 200'000);
                const auto clone_code =
                    slot_proxy_code(classify::slots::kErc1967Impl, false, std::nullopt, 0x777);
                for (unsigned i = direct; i < spec_.active_proxies; ++i) {
                    const Address proxy = make_address("active" + std::to_string(i));
                    deploy_via(eoa_at(i), factory, false, Address{}, proxy, clone_code,
                               i % months, 100'000);
                    const Selector sel = make_selector("clone_use");
                    use_proxy(eoa_at(i + 3), proxy, shared_logic, sel, (i + 2) % months);
                    actives.push_back(proxy);
                }
            }
            for (const auto& a : actives) expected_detected_.insert(a);
        }

        // --- inactive proxies: present bytecode, no forwarding ---------------
        for (unsigned i = 0; i < spec_.inactive_proxies; ++i) {
            const Address proxy = make_address("inactive" + std::to_string(i));
            deploy_direct(eoa_at(i + 11), proxy,
                          slot_proxy_code(classify::slots::kErc1967Impl, false, std::nullopt,
                                          0x30000 + i),
                          i % months, 100'000);
            if (i < 3) {
                // one non-triggering call, mirroring the near-miss cases
                Tx tx = begin_tx((i + 1) % months);
                HexData calldata;
                const Selector sel = make_selector("noop" + std::to_string(i));
                calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                add_trace(tx, {}, eoa_at(i + 13), proxy, CallType::Call, calldata, 22'000);
                finish_tx(tx);
            }
            inactives.push_back(proxy);
        }

        // --- non-proxies -----------------------------------------------------
        {
            std::vector<Address> targets;
            for (unsigned i = 0; i < spec_.non_proxies; ++i) {
                const Address c = make_address("other" + std::to_string(i));
                deploy_direct(eoa_at(i + 17), c, filler_code(0x40000 + i), i % months,
                              80'000 + i * 7);
                others.push_back(c);
                targets.push_back(c);
            }
            // adversarial delegators, labeled "other": selector mismatch,
            // empty-input delegate, constructor-time delegate
            if (others.size() >= 6) {
                {  // mismatched selectors
                    Tx tx = begin_tx(1 % months);
                    const Selector outer = make_selector("outer");
                    const Selector inner = make_selector("inner");
                    HexData in_outer, in_inner;
                    in_outer.bytes.assign(outer.bytes.begin(), outer.bytes.end());
                    in_inner.bytes.assign(inner.bytes.begin(), inner.bytes.end());
                    add_trace(tx, {}, eoa_at(21), others[0], CallType::Call, in_outer, 50'000);
                    add_trace(tx, {0}, others[0], others[1], CallType::DelegateCall, in_inner,
                              40'000);
                    finish_tx(tx);
                }
                {  // both selectors absent (fallback-to-fallback)
                    Tx tx = begin_tx(2 % months);
                    add_trace(tx, {}, eoa_at(22), others[2], CallType::Call, HexData{}, 50'000);
                    add_trace(tx, {0}, others[2], others[3], CallType::DelegateCall, HexData{},
                              40'000);
                    finish_tx(tx);
                }
                {  // delegate during construction: parent is a create trace
                    const Address ctor_proxy = make_address("ctor_delegator");
                    Tx tx = begin_tx(3 % months);
                    const Selector sel = make_selector("init");
                    HexData initcode;
                    initcode.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                    initcode.bytes.push_back(0x00);
                    HexData calldata;
                    calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                    add_trace(tx, {}, eoa_at(23), ctor_proxy, CallType::Create, initcode,
                              120'000);
                    add_trace(tx, {0}, ctor_proxy, others[4], CallType::DelegateCall, calldata,
                              30'000);
                    register_contract(ctor_proxy, filler_code(0x51000), tx);
                    finish_tx(tx);
                    others.push_back(ctor_proxy);
                }
                // plain cross-contract call traffic
                for (unsigned i = 0; i + 1 < std::min<size_t>(targets.size(), 12); i += 2) {
                    Tx tx = begin_tx(i % months);
                    const Selector sel = make_selector("hop" + std::to_string(i));
                    HexData calldata;
                    calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                    add_trace(tx, {}, eoa_at(i), targets[i], CallType::Call, calldata, 60'000);
                    add_trace(tx, {0}, targets[i], targets[i + 1], CallType::Call, calldata,
                              45'000);
                    finish_tx(tx);
                }
            }
        }

        // --- creational patterns ---------------------------------------------
        for (size_t p = 0; p < spec_.patterns.size(); ++p)
            plant_pattern(spec_.patterns[p], static_cast<unsigned>(p), eoas, months);

        // --- classifier fixtures ---------------------------------------------
        plant_classifier_fixtures(eoas, months);

        // --- filler to reach the transaction target --------------------------
        uint64_t filler_idx = 0;
        while (tx_counter_ < spec_.target_transactions) {
            const unsigned m = static_cast<unsigned>(filler_idx % months);
            uint64_t kind = filler_idx % 4;
            if (others.empty() && (kind == 0 || kind == 2)) kind = 1;
            if (actives.empty() && kind == 3) kind = 1;
            switch (kind) {
                case 0: {  // plain EOA -> contract call
                    Tx tx = begin_tx(m);
                    const Selector sel = make_selector("fill" + std::to_string(filler_idx % 5));
                    HexData calldata;
                    calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                    add_trace(tx, {}, eoa_at(filler_idx), others[filler_idx % others.size()],
                              CallType::Call, calldata, 25'000);
                    finish_tx(tx);
                    break;
                }
                case 1: {  // EOA value transfer (payload-free)
                    Tx tx = begin_tx(m);
                    auto& t = add_trace(tx, {}, eoa_at(filler_idx), eoa_at(filler_idx + 1),
                                        CallType::Call, HexData{}, 21'000);
                    t.value = BigInt("123456789012345678901234567890");  // exceeds 64 bits
                    finish_tx(tx);
                    break;
                }
                case 2: {  // multi-contract call chain
                    Tx tx = begin_tx(m);
                    const Selector sel = make_selector("chain");
                    HexData calldata;
                    calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
                    const auto& a = others[filler_idx % others.size()];
                    const auto& b = others[(filler_idx + 1) % others.size()];
                    add_trace(tx, {}, eoa_at(filler_idx), a, CallType::Call, calldata, 70'000);
                    add_trace(tx, {0}, a, b, CallType::Call, calldata, 50'000);
                    if (filler_idx % 8 == 2) {
                        const auto& c = others[(filler_idx + 2) % others.size()];
                        add_trace(tx, {0, 0}, b, c, CallType::StaticCall, calldata, 20'000);
                    }
                    finish_tx(tx);
                    break;
                }
                case 3: {  // proxy usage traffic
                    const auto& proxy = actives[filler_idx % actives.size()];
                    const auto& logic = *logic_map_[proxy].begin();
                    use_proxy(eoa_at(filler_idx), proxy, logic,
                              make_selector("fill_use" + std::to_string(filler_idx % 3)), m);
                    break;
                }
            }
            ++filler_idx;
        }

        // --- ground truth ----------------------------------------------------
        compute_monthly_tallies();
        plants_["seed"] = spec_.seed;
        plants_["cohort"]["actives"] = addresses_json(actives);
        plants_["cohort"]["inactives"] = addresses_json(inactives);
        plants_["cohort"]["others"] = addresses_json(others);
        std::vector<Address> detected(expected_detected_.begin(), expected_detected_.end());
        plants_["expected_detected"] = addresses_json(detected);
        for (const auto& [proxy, logics] : logic_map_) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& l : logics) arr.push_back(l.str());
            plants_["logic_map"][proxy.str()] = arr;
        }
        for (const auto& [month, tally] : monthly_) {
            nlohmann::ordered_json m;
            m["txs"] = tally.txs;
            m["multi"] = tally.multi;
            m["multi_call"] = tally.multi_by_type[static_cast<int>(CallType::Call)];
            m["multi_callcode"] = tally.multi_by_type[static_cast<int>(CallType::CallCode)];
            m["multi_staticcall"] = tally.multi_by_type[static_cast<int>(CallType::StaticCall)];
            m["multi_delegatecall"] =
                tally.multi_by_type[static_cast<int>(CallType::DelegateCall)];
            m["proxy_touch"] = tally.proxy_touch;
            m["proxy_touch_multi"] = tally.proxy_touch_multi;
            plants_["monthly"][month.str()] = m;
        }
        ground_truth_.clear();
        for (const auto& a : actives) ground_truth_.emplace_back(a, "proxy");
        for (const auto& a : inactives) ground_truth_.emplace_back(a, "proxy");
        for (const auto& a : others) ground_truth_.emplace_back(a, "other");
    }

    // Plants one creational pattern and returns the terminal proxy.
    void plant_pattern(const std::string& signature, unsigned index,
                       const std::vector<Address>& eoas, unsigned months) {
        const auto labels = parse_pattern(signature);
        const std::string tag = "pat" + std::to_string(index);
        const Address eoa = eoas[(index + 29) % eoas.size()];
        const unsigned m0 = index % months;

        Address previous;  // previous node in the chain (deployer of the next)
        bool previous_is_proxy = false;
        Address previous_logic;
        for (size_t i = 1; i + 1 < labels.size(); ++i) {
            const bool is_pf = labels[i] == "PF";
            const Address node = make_address(tag + "/node" + std::to_string(i));
            std::vector<uint8_t> code =
                is_pf ? slot_proxy_code(classify::slots::kErc1967Impl, false, std::nullopt,
                                        0x60000 + index * 32 + static_cast<uint32_t>(i))
                      : filler_code(0x70000 + index * 32 + static_cast<uint32_t>(i));
            Address node_logic;
            if (is_pf) {
                node_logic = make_address(tag + "/logic" + std::to_string(i));
                deploy_direct(eoa, node_logic, filler_code(0x80000 + index * 32 + i), m0,
                              150'000);
            }
            if (i == 1) {
                deploy_direct(eoa, node, std::move(code), m0, 900'000 + index * 100);
            } else {
                deploy_via(eoa, previous, previous_is_proxy, previous_logic, node,
                           std::move(code), m0, 850'000 + index * 100);
            }
            if (is_pf) {
                expected_detected_.insert(node);
                logic_map_[node].insert(node_logic);
            }
            previous = node;
            previous_is_proxy = is_pf;
            previous_logic = node_logic;
        }

        const Address proxy = make_address(tag + "/proxy");
        const Address logic = make_address(tag + "/proxy_logic");
        deploy_direct(eoa, logic, filler_code(0x90000 + index), m0, 140'000);
        auto code = slot_proxy_code(classify::slots::kErc1967Impl, false, std::nullopt,
                                    0xa0000 + index);
        if (labels.size() == 2) {
            deploy_direct(eoa, proxy, std::move(code), m0, 120'000 + index);
        } else {
            deploy_via(eoa, previous, previous_is_proxy, previous_logic, proxy, std::move(code),
                       m0, 110'000 + index);
        }
        use_proxy(eoas[(index + 31) % eoas.size()], proxy, logic,
                  make_selector(tag + "_use"), (m0 + 1) % months);
        expected_detected_.insert(proxy);
        plants_["patterns"][signature]["proxy"] = proxy.str();
    }

    void plant_classifier_fixtures(const std::vector<Address>& eoas, unsigned months) {
        using classify::slots::kErc1822Proxiable;
        using classify::slots::kErc1967Beacon;
        using classify::slots::kErc1967Impl;
        using classify::slots::kOzLegacyImpl;
        const Address eoa = eoas[33 % eoas.size()];
        auto word_of = [](const Address& a) {
            classify::StorageWord w{};
            std::copy(a.bytes.begin(), a.bytes.end(), w.begin() + 12);
            return w;
        };
        auto hex32 = [](const classify::StorageWord& w) {
            return hex::encode(w.data(), w.size());
        };

        struct Plant {
            const char* kind;
            Address proxy;
            Address logic;
            const char* purpose;
        };
        std::vector<Plant> plants;

        // erc1167: canonical runtime, hard-coded target
        {
            const Address logic = make_address("cls/erc1167_logic");
            const Address proxy = make_address("cls/erc1167");
            deploy_direct(eoa, logic, filler_code(0xb0001), 0, 200'000);
            deploy_direct(eoa, proxy, minimal_proxy_code(logic), 0, 45'000);
            state_[proxy.str()]["storage"] = nlohmann::json::object();
            plants.push_back({"erc1167_minimal", proxy, logic, "forwarder"});
        }
        // erc1967 with an in-proxy update section
        {
            const Address logic = make_address("cls/erc1967_logic");
            const Address proxy = make_address("cls/erc1967");
            deploy_direct(eoa, logic, filler_code(0xb0002), 0, 210'000);
            deploy_direct(eoa, proxy, slot_proxy_code(kErc1967Impl, true), 0, 130'000);
            state_[proxy.str()]["storage"][hex32(kErc1967Impl)] = hex32(word_of(logic));
            plants.push_back({"erc1967", proxy, logic, "upgradeability"});
        }
        // erc1967 beacon: proxy fetches the target from a beacon getter
        {
            const Address impl = make_address("cls/beacon_impl");
            const Address beacon = make_address("cls/beacon");
            const Address proxy = make_address("cls/beacon_proxy");
            deploy_direct(eoa, impl, filler_code(0xb0003), 0, 220'000);
            deploy_direct(eoa, beacon,
                          getter_callee_code(classify::kImplementationSelector, 0x01, true), 0,
                          160'000);
            deploy_direct(eoa, proxy,
                          beacon_proxy_code(kErc1967Beacon, classify::kImplementationSelector),
                          0, 140'000);
            state_[proxy.str()]["storage"][hex32(kErc1967Beacon)] = hex32(word_of(beacon));
            plants.push_back({"erc1967_beacon", proxy, impl, "upgradeability"});
        }
        // erc1822 uups: update function lives in the logic contract
        {
            const Address logic = make_address("cls/uups_logic");
            const Address proxy = make_address("cls/uups");
            Asm logic_code;
            logic_code.push({0xb0 >> 4, 0x04});  // tag noise
            logic_code.op(0x50);
            logic_code.push_word(kErc1967Impl).op(evm::OP_SSTORE).op(evm::OP_STOP);
            deploy_direct(eoa, logic, logic_code.code, 0, 230'000);
            deploy_direct(eoa, proxy, slot_proxy_code(kErc1967Impl, false), 0, 125'000);
            state_[proxy.str()]["storage"][hex32(kErc1822Proxiable)] = hex32(word_of(logic));
            plants.push_back({"erc1822_uups", proxy, logic, "upgradeability"});
        }
        // openzeppelin legacy slot
        {
            const Address logic = make_address("cls/oz_logic");
            const Address proxy = make_address("cls/oz");
            deploy_direct(eoa, logic, filler_code(0xb0005), 0, 205'000);
            deploy_direct(eoa, proxy, slot_proxy_code(kOzLegacyImpl, true), 0, 135'000);
            state_[proxy.str()]["storage"][hex32(kOzLegacyImpl)] = hex32(word_of(logic));
            plants.push_back({"openzeppelin_legacy", proxy, logic, "upgradeability"});
        }
        // gnosis safe: slot 0 master copy plus the masterCopy() marker
        {
            const Address master = make_address("cls/gnosis_master");
            const Address proxy = make_address("cls/gnosis");
            Asm master_code;
            master_code.push_u8(0x00).op(evm::OP_SSTORE).op(evm::OP_STOP);  // changeMasterCopy
            deploy_direct(eoa, master, master_code.code, 0, 400'000);
            deploy_direct(eoa, proxy,
                          slot_proxy_code(classify::slots::kGnosisMasterCopy, false,
                                          classify::kMasterCopySelector),
                          0, 90'000);
            state_[proxy.str()]["storage"][hex32(classify::slots::kGnosisMasterCopy)] =
                hex32(word_of(master));
            plants.push_back({"gnosis_safe", proxy, master, "upgradeability"});
        }
        // erc897: only the implementation() call answers
        {
            const Address logic = make_address("cls/erc897_logic");
            const Address proxy = make_address("cls/erc897");
            deploy_direct(eoa, logic, filler_code(0xb0007), 0, 215'000);
            classify::StorageWord two{};
            two[31] = 0x02;
            deploy_direct(eoa, proxy, slot_proxy_code(two, false), 0, 128'000);
            state_[proxy.str()]["storage"] = nlohmann::json::object();
            state_[proxy.str()]["calls"]
                  [hex::encode(std::vector<uint8_t>(classify::kImplementationSelector.bytes.begin(),
                                                    classify::kImplementationSelector.bytes.end()))] =
                      hex32(word_of(logic));
            plants.push_back({"erc897", proxy, logic, "forwarder"});
        }
        // customized: hard-coded target, no slots, implementation() reverts
        {
            const Address logic = make_address("cls/custom_logic");
            const Address proxy = make_address("cls/custom");
            deploy_direct(eoa, logic, filler_code(0xb0008), 0, 190'000);
            deploy_direct(eoa, proxy, hardcoded_proxy_code(logic), 0, 95'000);
            state_[proxy.str()]["storage"] = nlohmann::json::object();
            plants.push_back({"customized", proxy, logic, "forwarder"});
        }
        // adversarial: sstore bytes hidden inside a push immediate
        {
            const Address logic = make_address("cls/adversarial_logic");
            const Address proxy = make_address("cls/adversarial");
            deploy_direct(eoa, logic, filler_code(0xb0009), 0, 185'000);
            deploy_direct(eoa, proxy, adversarial_proxy_code(), 0, 97'000);
            state_[proxy.str()]["storage"]
                  ["0x0000000000000000000000000000000000000000000000000000000000000000"] =
                      hex32(word_of(logic));
            plants_["classifier"]["adversarial"] = proxy.str();
            plants.push_back({"customized_adversarial", proxy, logic, "forwarder"});
        }

        unsigned m = 1 % months;
        for (const auto& plant : plants) {
            use_proxy(eoas[35 % eoas.size()], plant.proxy, plant.logic,
                      make_selector(std::string("cls_") + plant.kind), m);
            expected_detected_.insert(plant.proxy);
            if (std::string(plant.kind) != "customized_adversarial")
                plants_["classifier"]["kinds"][plant.kind] = plant.proxy.str();
            plants_["classifier"]["purpose"][plant.proxy.str()] = plant.purpose;
            m = (m + 1) % months;
        }
    }

    void build_stress() {
        // Lean corpus for the throughput floor: three traces per transaction,
        // one of them a confirming delegatecall.
        const uint64_t txs = std::max<uint64_t>(1, spec_.stress_records / 3);
        const unsigned pool = 1000;
        std::vector<Address> callers, proxies, logics, eoas;
        Tx genesis = begin_tx(0);
        add_trace(genesis, {}, make_address("s_deployer"), make_address("s_genesis"),
                  CallType::Create, HexData{}, 50'000);
        finish_tx(genesis);
        for (unsigned i = 0; i < pool; ++i) {
            callers.push_back(make_address("s_caller" + std::to_string(i)));
            proxies.push_back(make_address("s_proxy" + std::to_string(i)));
            logics.push_back(make_address("s_logic" + std::to_string(i)));
            eoas.push_back(make_address("s_eoa" + std::to_string(i)));
            for (const Address* a : {&callers.back(), &proxies.back(), &logics.back()}) {
                ContractRecord rec;
                rec.address = *a;
                rec.bytecode = HexData{filler_code(0xc0000 + i)};
                rec.created_at = genesis.timestamp;
                rec.creation_tx = genesis.hash;
                rec.block_number = genesis.block;
                contracts_.push_back(std::move(rec));
                contract_registry_.insert(*a);
            }
            expected_detected_.insert(proxies.back());
        }
        const Selector sel = make_selector("stress");
        HexData calldata;
        calldata.bytes.assign(sel.bytes.begin(), sel.bytes.end());
        for (int i = 0; i < 28; ++i) calldata.bytes.push_back(static_cast<uint8_t>(i));
        for (uint64_t i = 0; i < txs; ++i) {
            const unsigned k = static_cast<unsigned>(i % pool);
            Tx tx = begin_tx(static_cast<unsigned>(i % 12));
            add_trace(tx, {}, eoas[k], callers[k], CallType::Call, calldata, 60'000);
            add_trace(tx, {0}, callers[k], proxies[k], CallType::Call, calldata, 45'000);
            add_trace(tx, {0, 0}, proxies[k], logics[k], CallType::DelegateCall, calldata,
                      30'000);
            finish_tx(tx);
        }
        plants_["seed"] = spec_.seed;
        plants_["stress_records"] = traces_.size();
    }

    // -- output ---------------------------------------------------------------

    static nlohmann::json addresses_json(const std::vector<Address>& addrs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& a : addrs) arr.push_back(a.str());
        return arr;
    }

    void write(const std::string& out_dir) {
        {
            FileWriter w((fs::path(out_dir) / "traces.jsonl").string());
            std::string buf;
            for (const auto& t : traces_) {
                buf.clear();
                ingest::append_trace_jsonl(buf, t);
                buf += '\n';
                w.write(buf);
            }
            w.close();
        }
        {
            FileWriter w((fs::path(out_dir) / "contracts.jsonl").string());
            std::string buf;
            for (const auto& c : contracts_) {
                buf.clear();
                ingest::append_contract_jsonl(buf, c);
                buf += '\n';
                w.write(buf);
            }
            w.close();
        }
        {
            std::string csv = "address,label\n";
            for (const auto& [addr, label] : ground_truth_) {
                csv += addr.str();
                csv += ',';
                csv += label;
                csv += '\n';
            }
            write_file((fs::path(out_dir) / "ground_truth.csv").string(), csv);
        }
        write_file((fs::path(out_dir) / "state_fixtures.json").string(), state_.dump(2) + "\n");
        plants_["counts"] = {{"transactions", tx_counter_},
                             {"traces", traces_.size()},
                             {"contracts", contracts_.size()}};
        write_file((fs::path(out_dir) / "plants.json").string(), plants_.dump(2) + "\n");
    }

    struct MonthTally {
        uint64_t txs = 0;
        uint64_t multi = 0;
        uint64_t multi_by_type[7] = {};
        uint64_t proxy_touch = 0;
        uint64_t proxy_touch_multi = 0;
    };

    Spec spec_;
    Rng rng_;
    std::vector<TraceRecord> traces_;
    std::vector<ContractRecord> contracts_;
    std::set<Address> contract_registry_;
    std::set<Address> expected_detected_;
    std::map<Address, std::set<Address>> logic_map_;
    std::map<Month, MonthTally> monthly_;
    std::vector<std::pair<Address, std::string>> ground_truth_;
    nlohmann::ordered_json plants_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json state_ = nlohmann::ordered_json::object();
    uint64_t next_block_ = 1'000'000;
    uint64_t tx_counter_ = 0;
};

inline void generate(const Spec& spec, const std::string& out_dir) {
    Generator(spec).run(out_dir);
}

}  // namespace proxyprobe::fixturegen
