#include "planshape/guidance/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "planshape/strips/planner.hpp"

namespace planshape::guidance {

std::string Transcript::to_jsonl() const {
    std::ostringstream out;
    for (const auto& r : records) {
        nlohmann::json j = {{"step", r.step},
                            {"attempt", r.attempt},
                            {"prompt", r.prompt},
                            {"response", r.response},
                            {"verdict", r.verdict}};
        out << j.dump() << '\n';
    }
    return out.str();
}

std::vector<TranscriptRecord> transcript_from_jsonl(const std::string& text) {
    std::vector<TranscriptRecord> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        TranscriptRecord r;
        r.step = j.value("step", 0);
        r.attempt = j.value("attempt", 0);
        r.prompt = j.value("prompt", std::string{});
        r.response = j.value("response", std::string{});
        r.verdict = j.value("verdict", std::string{});
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("backend url missing scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) throw TransportError("backend url is empty");
}

std::string HttpBackend::complete(const std::string& prompt) {
    const auto [base, path] = split_url(config_.url);
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config_.temperature}};
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            const double delay = config_.backoff_base_s * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(base);
        client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("backend returned status " + std::to_string(res->status) +
                                 ": " + res->body);
        }
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed completion payload: ") + e.what());
        }
    }
    throw TransportError("backend unreachable after " + std::to_string(config_.retries + 1) +
                         " attempts (" + last_error + ")");
}

ScriptedBackend ScriptedBackend::from_jsonl(const std::string& text) {
    std::vector<std::string> responses;
    for (auto& r : transcript_from_jsonl(text)) responses.push_back(std::move(r.response));
    return ScriptedBackend(std::move(responses));
}

std::string ScriptedBackend::complete(const std::string&) {
    if (cursor_ >= responses_.size()) {
        throw TransportError("scripted fixture exhausted after " +
                             std::to_string(responses_.size()) + " responses");
    }
    return responses_[cursor_++];
}

OracleBackend::OracleBackend(const Abstraction& abs, double corruption, std::uint64_t seed,
                             int partial_subgoals)
    : abs_(abs), corruption_(corruption), partial_subgoals_(partial_subgoals), rng_(seed) {}

std::string OracleBackend::id() const {
    std::ostringstream out;
    out << "mock:oracle";
    if (corruption_ > 0) out << ",corruption=" << corruption_;
    if (partial_subgoals_ > 0) out << ",partial=" << partial_subgoals_;
    return out.str();
}

std::string OracleBackend::oracle_action() const {
    if (abs_.mode == Abstraction::Mode::hierarchical) {
        strips::StripsProblem from = abs_.problem;
        if (context_.symbolic_state) from.init = *context_.symbolic_state;
        auto res = strips::bfs_plan(from, abs_.ground_actions);
        if (!res.found || res.plan.empty()) {
            throw TransportError("oracle found no plan from the current state");
        }
        return res.plan.front().str();
    }
    const worlds::AgentState from = context_.env_state ? *context_.env_state : abs_.start;
    auto plan = lowlevel_plan(abs_.env, from);
    if (!plan || plan->empty()) throw TransportError("oracle found no low-level plan");
    return worlds::action_names(abs_.env)[plan->front()];
}

std::string OracleBackend::whole_plan() const {
    if (abs_.mode == Abstraction::Mode::hierarchical) {
        auto res = strips::bfs_plan(abs_.problem, abs_.ground_actions);
        if (!res.found) throw TransportError("oracle found no plan");
        std::vector<strips::GroundAction> plan = res.plan;
        if (partial_subgoals_ > 0 && !abs_.subgoal_predicates.empty()) {
            // shortest prefix achieving the requested number of sub-goals
            strips::FluentSet state = abs_.problem.init;
            std::vector<bool> achieved(abs_.subgoal_predicates.size(), false);
            std::size_t cut = plan.size();
            int count = 0;
            for (std::size_t i = 0; i < plan.size(); ++i) {
                state = strips::apply(state, plan[i]);
                for (std::size_t g = 0; g < abs_.subgoal_predicates.size(); ++g) {
                    if (achieved[g]) continue;
                    for (const auto& f : state) {
                        if (f.predicate == abs_.subgoal_predicates[g]) {
                            achieved[g] = true;
                            ++count;
                            break;
                        }
                    }
                }
                if (count >= partial_subgoals_) {
                    cut = i + 1;
                    break;
                }
            }
            plan.resize(cut);
        }
        std::ostringstream out;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (i) out << ", ";
            out << plan[i].str();
        }
        return out.str();
    }
    auto plan = lowlevel_plan(abs_.env, abs_.start);
    if (!plan) throw TransportError("oracle found no low-level plan");
    std::vector<int> actions = *plan;
    if (partial_subgoals_ > 0) {
        // deterministic abstraction has no sub-goal structure; emit a prefix
        actions.resize(std::min<std::size_t>(actions.size(),
                                             std::max<std::size_t>(1, actions.size() / 2)));
    }
    std::ostringstream out;
    const auto& names = worlds::action_names(abs_.env);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out << ", ";
        out << names[actions[i]];
    }
    return out.str();
}

std::string OracleBackend::complete(const std::string&) {
    if (!context_.env_state && !context_.symbolic_state) {
        // no loop context observed: this is a direct whole-plan query
        return whole_plan();
    }
    if (!context_.back_prompt && corruption_ > 0 && rng_.uniform() < corruption_) {
        if (abs_.mode == Abstraction::Mode::hierarchical && context_.invalid &&
            !context_.invalid->empty()) {
            const auto pick = (*context_.invalid)[rng_.index(
                static_cast<int>(context_.invalid->size()))];
            return abs_.ground_actions[pick].str();
        }
        if (abs_.mode == Abstraction::Mode::deterministic && context_.feasibility &&
            !context_.feasibility->infeasible.empty()) {
            const auto& inf = context_.feasibility->infeasible;
            return worlds::action_names(abs_.env)[inf[rng_.index(
                static_cast<int>(inf.size()))]];
        }
    }
    return oracle_action();
}

}  // namespace planshape::guidance
