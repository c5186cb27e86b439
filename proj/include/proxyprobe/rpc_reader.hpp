// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON-RPC StateReader (eth_getStorageAt / eth_call against an Ethereum
// node). Transport or protocol failures surface as unavailability; an
// execution revert is a definite answer, not a failure.

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "proxyprobe/classify.hpp"

namespace proxyprobe::classify {

class RpcStateReader : public StateReader {
  public:
    // Accepts http://host:port[/path]; TLS endpoints are not supported.
    explicit RpcStateReader(const std::string& url) {
        std::string rest = url;
        const std::string scheme = "http://";
        if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
        const auto slash = rest.find('/');
        std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
        const auto colon = hostport.rfind(':');
        int port = 8545;
        if (colon != std::string::npos) {
            port = std::stoi(hostport.substr(colon + 1));
            hostport = hostport.substr(0, colon);
        }
        client_ = std::make_unique<httplib::Client>(hostport, port);
        client_->set_read_timeout(10, 0);
    }

    StorageResult storage_at(const Address& addr, const StorageWord& slot) override {
        nlohmann::json params = nlohmann::json::array();
        params.push_back(addr.str());
        params.push_back(hex::encode(slot.data(), slot.size()));
        params.push_back("latest");
        const auto response = request("eth_getStorageAt", params);
        if (!response || !response->contains("result") || !(*response)["result"].is_string())
            return StorageResult::unavailable();
        std::string text = (*response)["result"].get<std::string>();
        if (text.rfind("0x", 0) == 0) text = text.substr(2);
        if (text.size() % 2 != 0) text.insert(text.begin(), '0');  // nodes may answer "0x0"
        auto raw = hex::decode(text);
        if (!raw || raw->size() > 32) return StorageResult::unavailable();
        StorageWord word{};  // left-pad short answers
        std::copy(raw->begin(), raw->end(), word.begin() + (32 - raw->size()));
        return StorageResult::ok(word);
    }

    CallResult call(const Address& addr, const HexData& calldata) override {
        nlohmann::json params = nlohmann::json::array();
        params.push_back({{"to", addr.str()}, {"data", calldata.str()}});
        params.push_back("latest");
        const auto response = request("eth_call", params);
        if (!response) return CallResult::unavailable();
        if (response->contains("error")) {
            const auto message = (*response)["error"].value("message", std::string{});
            if (message.find("revert") != std::string::npos) return CallResult::reverted();
            return CallResult::unavailable();
        }
        if (!response->contains("result") || !(*response)["result"].is_string())
            return CallResult::unavailable();
        auto raw = HexData::parse((*response)["result"].get<std::string>());
        if (!raw) return CallResult::unavailable();
        return CallResult::ok(std::move(*raw));
    }

  private:
    std::optional<nlohmann::json> request(const std::string& method,
                                          const nlohmann::json& params) {
        nlohmann::json body = {
            {"jsonrpc", "2.0"}, {"id", 1}, {"method", method}, {"params", params}};
        std::lock_guard<std::mutex> lock(mutex_);
        auto res = client_->Post(path_, body.dump(), "application/json");
        if (!res || res->status != 200) return std::nullopt;
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) return std::nullopt;
        return parsed;
    }

    std::unique_ptr<httplib::Client> client_;
    std::string path_ = "/";
    std::mutex mutex_;
};

}  // namespace proxyprobe::classify
