#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "planshape/guidance/prompt.hpp"
#include "planshape/rng.hpp"

namespace planshape::guidance {

struct TranscriptRecord {
    int step = 0;
    int attempt = 0;  // 0 = step-prompt, k>0 = k-th back-prompt
    std::string prompt;
    std::string response;
    std::string verdict;    // valid | invalid | parse-error
    std::string timestamp;  // in-memory only; the JSONL schema omits it
};

struct Transcript {
    std::vector<TranscriptRecord> records;  // append-only

    void add(TranscriptRecord r) { records.push_back(std::move(r)); }
    std::string to_jsonl() const;
};

std::vector<TranscriptRecord> transcript_from_jsonl(const std::string& text);

// State snapshot handed to model-based mock backends before each completion.
// Wire backends ignore it.
struct StepContext {
    bool back_prompt = false;
    // hierarchical
    const strips::FluentSet* symbolic_state = nullptr;
    const std::vector<std::size_t>* valid = nullptr;
    const std::vector<std::size_t>* invalid = nullptr;
    // deterministic
    const worlds::AgentState* env_state = nullptr;
    const Feasibility* feasibility = nullptr;
};

class ProposerBackend {
public:
    virtual ~ProposerBackend() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::string id() const = 0;
    virtual double temperature() const { return 0.5; }
    virtual void on_context(const StepContext&) {}
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HttpConfig {
    std::string url;  // full endpoint, e.g. http://host:8080/v1/chat/completions
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.5;
    double timeout_s = 60.0;
    int retries = 3;
    double backoff_base_s = 0.5;  // doubles per retry
    std::string api_key_env = "LLM_API_KEY";
};

// OpenAI-compatible chat-completions client. Sends
// {model, messages:[{role:"user", content}], temperature} and reads
// choices[0].message.content. Retries transport failures and 5xx with
// exponential backoff; throws TransportError when the budget is exhausted.
class HttpBackend : public ProposerBackend {
public:
    explicit HttpBackend(HttpConfig config);
    std::string complete(const std::string& prompt) override;
    std::string id() const override { return "http:" + config_.model; }
    double temperature() const override { return config_.temperature; }

private:
    HttpConfig config_;
};

// Replays the `response` fields of a transcript fixture in order. Running
// past the end raises TransportError.
class ScriptedBackend : public ProposerBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    static ScriptedBackend from_jsonl(const std::string& text);

    std::string complete(const std::string& prompt) override;
    std::string id() const override { return "mock:scripted"; }

private:
    std::vector<std::string> responses_;
    std::size_t cursor_ = 0;
};

// Plan-oracle mock. With probability `corruption` a fresh step-prompt is
// answered with a parseable but invalid action (drawn from the verifier's
// invalid set), which the loop must catch; back-prompts are answered with the
// oracle action (feedback-respecting). Direct prompts return the whole oracle
// plan, truncated to `partial_subgoals` achieved sub-goals when positive.
class OracleBackend : public ProposerBackend {
public:
    OracleBackend(const Abstraction& abs, double corruption = 0.0, std::uint64_t seed = 0,
                  int partial_subgoals = 0);

    std::string complete(const std::string& prompt) override;
    std::string id() const override;
    void on_context(const StepContext& ctx) override { context_ = ctx; }

private:
    std::string oracle_action() const;
    std::string whole_plan() const;

    const Abstraction& abs_;
    double corruption_;
    int partial_subgoals_;
    RngStream rng_;
    StepContext context_;  // null state pointers = direct whole-plan query
};

}  // namespace planshape::guidance
