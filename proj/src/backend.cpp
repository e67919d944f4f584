#include "trc/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "trc/util.hpp"

namespace trc {

using nlohmann::json;

int RetryPolicy::delay_ms(int attempt) const {
    double delay = initial_delay_ms * std::pow(multiplier, attempt);
    return static_cast<int>(std::min<double>(delay, max_delay_ms));
}

std::string MockBackend::prompt_hash(const std::string& prompt) {
    return to_hex(fnv1a(prompt));
}

std::unique_ptr<MockBackend> MockBackend::from_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_input("cannot open mock script: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_script_json(buf.str());
}

std::unique_ptr<MockBackend> MockBackend::from_script_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail_input(std::string("malformed mock script: ") + e.what());
    }
    auto backend = std::make_unique<MockBackend>();
    if (doc.contains("default")) {
        backend->has_default_ = true;
        backend->default_ = doc["default"].get<std::string>();
    }
    // Bind before .items(): iterating a proxy over a temporary dangles.
    const json by_hash = doc.value("by_hash", json::object());
    for (const auto& [key, value] : by_hash.items())
        backend->by_hash_[key] = value.get<std::string>();
    for (const auto& rec : doc.value("by_contains", json::array()))
        backend->by_contains_.emplace_back(rec.at("contains").get<std::string>(),
                                           rec.at("response").get<std::string>());
    for (const auto& value : doc.value("by_ordinal", json::array()))
        backend->by_ordinal_.push_back(value.get<std::string>());
    if (doc.contains("max_context_chars"))
        backend->caps_.max_context_chars = doc["max_context_chars"].get<std::size_t>();
    return backend;
}

std::string MockBackend::complete(const std::string& prompt, int /*max_new_tokens*/) {
    auto it = by_hash_.find(prompt_hash(prompt));
    if (it != by_hash_.end()) return it->second;
    for (const auto& [needle, response] : by_contains_) {
        if (prompt.find(needle) != std::string::npos) return response;
    }
    if (ordinal_ < by_ordinal_.size()) return by_ordinal_[ordinal_++];
    if (has_default_) return default_;
    fail_backend("mock script has no response for prompt hash " + prompt_hash(prompt));
}

struct HttpBackend::Impl {
    std::unique_ptr<httplib::Client> client;
    std::string path;
};

namespace {

// scheme://host[:port]/path
void parse_url(const std::string& url, std::string& base, std::string& path) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail_input("backend url missing scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        base = url;
        path = "/";
    } else {
        base = url.substr(0, path_start);
        path = url.substr(path_start);
    }
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    caps_.max_context_chars = config_.max_context_chars;
    std::string base;
    parse_url(config_.url, base, impl_->path);
    impl_->client = std::make_unique<httplib::Client>(base);
    impl_->client->set_connection_timeout(10);
    impl_->client->set_read_timeout(120);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::name() const { return "http:" + config_.model; }

std::string HttpBackend::complete(const std::string& prompt, int max_new_tokens) {
    json body = {{"model", config_.model},
                 {"prompt", prompt},
                 {"max_tokens", max_new_tokens},
                 {"temperature", 0.0}};
    httplib::Headers headers;
    if (!config_.auth_env.empty()) {
        const char* token = std::getenv(config_.auth_env.c_str());
        if (token) headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = impl_->client->Post(impl_->path, headers, body.dump(), "application/json");
    if (!res) fail_backend("transport failure: " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail_backend("backend returned HTTP " + std::to_string(res->status));
    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        fail_backend(std::string("unparseable backend reply: ") + e.what());
    }
    if (reply.contains("text")) return reply["text"].get<std::string>();
    if (reply.contains("choices") && !reply["choices"].empty())
        return reply["choices"][0].value("text", "");
    fail_backend("backend reply has neither \"text\" nor \"choices\"");
}

std::string generate(GenerationBackend& backend, const std::string& prompt, int max_new_tokens,
                     const RetryPolicy& retry) {
    if (prompt.size() > backend.capabilities().max_context_chars)
        fail_input("prompt of " + std::to_string(prompt.size()) +
                   " chars exceeds backend context limit of " +
                   std::to_string(backend.capabilities().max_context_chars));
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.complete(prompt, max_new_tokens);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::backend || attempt + 1 >= retry.max_attempts)
                throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(retry.delay_ms(attempt)));
        }
    }
}

}  // namespace trc
