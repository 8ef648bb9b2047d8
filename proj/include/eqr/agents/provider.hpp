#pragma once

#include "eqr/agents/prompt.hpp"
#include "eqr/common/http.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace eqr::agents {

class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    /// Counts the call, then delegates to generate().
    std::string complete(const PromptEnvelope& prompt) {
        ++calls_;
        return generate(prompt);
    }

    virtual std::string name() const = 0;
    /// Byte-identical prompts yield byte-identical completions.
    virtual bool deterministic() const = 0;
    /// Cache scope: completions are reused only under the same identity.
    virtual std::string identity() const { return name(); }

    std::size_t calls() const { return calls_.load(); }

protected:
    virtual std::string generate(const PromptEnvelope& prompt) = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

/// Calls the provider, converting any failure into ProviderFailure carrying
/// the provider name and the prompt hash.
std::string invoke(LlmProvider& provider, const PromptEnvelope& prompt);

/// Deterministic stand-in that only restates values found in its context
/// blocks. Understands the tasks issued by this engine; anything else gets
/// a listing of the context labels.
class MockProvider : public LlmProvider {
public:
    std::string name() const override { return "mock"; }
    bool deterministic() const override { return true; }

protected:
    std::string generate(const PromptEnvelope& prompt) override;
};

/// Completions from a caller-supplied function. Thread-safe.
class ScriptedProvider : public LlmProvider {
public:
    using Script = std::function<std::string(const PromptEnvelope&)>;
    ScriptedProvider(std::string name, Script script, bool deterministic = true);

    std::string name() const override { return name_; }
    bool deterministic() const override { return deterministic_; }

protected:
    std::string generate(const PromptEnvelope& prompt) override;

private:
    std::string name_;
    Script script_;
    bool deterministic_;
    std::mutex mutex_;
};

/// Replays completions keyed by prompt hash from a JSON-lines file
/// (`{"prompt_sha256", "task", "completion"}` per line). With an inner
/// provider it records: misses are forwarded, appended, and saved.
class ReplayProvider : public LlmProvider {
public:
    explicit ReplayProvider(std::filesystem::path file, std::shared_ptr<LlmProvider> recorder = nullptr);

    std::string name() const override { return "replay"; }
    bool deterministic() const override { return true; }
    std::string identity() const override;
    std::size_t size() const;

protected:
    std::string generate(const PromptEnvelope& prompt) override;

private:
    void save_locked() const;

    std::filesystem::path file_;
    std::shared_ptr<LlmProvider> recorder_;
    mutable std::mutex mutex_;
    std::map<std::string, std::pair<std::string, std::string>> records_;  // hash -> (task, completion)
};

struct HttpChatConfig {
    std::string endpoint;  // full chat-completions URL
    std::string model;
    /// Environment variable holding the bearer token. The token itself is
    /// never accepted from flags or files.
    std::string token_env = "EQR_LLM_API_KEY";
    http::Milliseconds timeout{120000};
    http::RetryPolicy retry;
};

/// OpenAI-style chat-completions client: one system and one user message,
/// reply read from choices[0].message.content.
class HttpChatProvider : public LlmProvider {
public:
    HttpChatProvider(HttpChatConfig config, std::shared_ptr<http::Client> client, http::Timing timing = {});

    std::string name() const override { return "http:" + config_.model; }
    bool deterministic() const override { return false; }
    std::string identity() const override { return "http:" + config_.model + "@" + config_.endpoint; }

protected:
    std::string generate(const PromptEnvelope& prompt) override;

private:
    HttpChatConfig config_;
    std::string token_;
    std::shared_ptr<http::Client> client_;
    http::Timing timing_;
    http::RateLimiter limiter_;
};

}  // namespace eqr::agents
