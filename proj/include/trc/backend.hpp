#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace trc {

struct BackendCapabilities {
    std::size_t max_context_chars = 1 << 20;
    bool supports_adapters = false;
};

struct RetryPolicy {
    int max_attempts = 4;
    int initial_delay_ms = 100;
    double multiplier = 2.0;
    int max_delay_ms = 2000;

    int delay_ms(int attempt) const;  // attempt is 0-based
};

// Text-generation backend. Implementations return the continuation only
// (prompt echo stripped). Greedy decoding, deterministic at temperature 0.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual const BackendCapabilities& capabilities() const = 0;
    virtual std::string name() const = 0;
    // Throws Error(backend) on transport failure; no retry at this level.
    virtual std::string complete(const std::string& prompt, int max_new_tokens) = 0;
};

// Scripted backend driven by a JSON file:
//   {"default": str, "by_hash": {hex64: str}, "by_ordinal": [str, ...],
//    "by_contains": [{"contains": str, "response": str}, ...]}
// Lookup order: by_hash, by_contains (first listed match), by_ordinal, default.
class MockBackend : public GenerationBackend {
public:
    static std::unique_ptr<MockBackend> from_script_file(const std::string& path);
    static std::unique_ptr<MockBackend> from_script_json(const std::string& json_text);

    const BackendCapabilities& capabilities() const override { return caps_; }
    std::string name() const override { return "mock"; }
    std::string complete(const std::string& prompt, int max_new_tokens) override;

    // Hash used for by_hash keys.
    static std::string prompt_hash(const std::string& prompt);

private:
    BackendCapabilities caps_{.max_context_chars = 1 << 20, .supports_adapters = true};
    std::map<std::string, std::string> by_hash_;
    std::vector<std::pair<std::string, std::string>> by_contains_;
    std::vector<std::string> by_ordinal_;
    std::size_t ordinal_ = 0;
    bool has_default_ = false;
    std::string default_;
};

struct HttpBackendConfig {
    std::string url;        // e.g. http://localhost:8080/v1/completions
    std::string model;
    std::string auth_env;   // env var holding the bearer token; never a config value
    std::size_t max_context_chars = 1 << 20;
    RetryPolicy retry;
};

// JSON completion endpoint client: POST {"model", "prompt", "max_tokens"},
// expects {"text": str} or OpenAI-style {"choices": [{"text": str}]}.
class HttpBackend : public GenerationBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    const BackendCapabilities& capabilities() const override { return caps_; }
    std::string name() const override;
    std::string complete(const std::string& prompt, int max_new_tokens) override;

private:
    struct Impl;
    HttpBackendConfig config_;
    BackendCapabilities caps_;
    std::unique_ptr<Impl> impl_;
};

// Context-limit guard plus retry with exponential backoff around
// backend.complete(). The single entry point used by the protocols.
std::string generate(GenerationBackend& backend, const std::string& prompt, int max_new_tokens,
                     const RetryPolicy& retry = {});

}  // namespace trc
