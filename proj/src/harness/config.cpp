#include "planshape/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace planshape::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: boolean expected for " + key + ", got '" + v + "'");
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
    std::vector<std::uint64_t> out;
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoull(item));
    }
    if (out.empty()) throw std::invalid_argument("config: seeds list is empty");
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            if (out[i] == out[j]) throw std::invalid_argument("config: duplicate seed");
        }
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[' && stripped.back() == ']') {
            section = stripped.substr(1, stripped.size() - 2);
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = section + "." + trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "experiment.environment") cfg.environment = value;
        else if (key == "experiment.abstraction") cfg.abstraction = value;
        else if (key == "experiment.guidance") cfg.guidance = value;
        else if (key == "experiment.out") cfg.out_dir = value;
        else if (key == "env.slip") cfg.slip = std::stod(value);
        else if (key == "env.horizon") cfg.horizon = std::stoi(value);
        else if (key == "env.seed") cfg.env_seed = std::stoull(value);
        else if (key == "backend.kind") cfg.backend = value;
        else if (key == "backend.corruption") cfg.corruption = std::stod(value);
        else if (key == "backend.partial_subgoals") cfg.partial_subgoals = std::stoi(value);
        else if (key == "backend.fixture") cfg.fixture = value;
        else if (key == "backend.url") cfg.http.url = value;
        else if (key == "backend.model") cfg.http.model = value;
        else if (key == "backend.temperature") cfg.http.temperature = std::stod(value);
        else if (key == "backend.timeout_s") cfg.http.timeout_s = std::stod(value);
        else if (key == "backend.retries") cfg.http.retries = std::stoi(value);
        else if (key == "loop.max_steps") cfg.budget_steps = std::stoi(value);
        else if (key == "loop.max_backprompts") cfg.budget_backprompts = std::stoi(value);
        else if (key == "shaping.mode") cfg.shaping = value;
        else if (key == "shaping.c") cfg.potential_scale = std::stod(value);
        else if (key == "shaping.gamma_weighted") cfg.gamma_weighted = parse_bool(value, key);
        else if (key == "shaping.pure_state_potential")
            cfg.pure_state_potential = parse_bool(value, key);
        else if (key == "train.gamma") cfg.train.gamma = std::stod(value);
        else if (key == "train.alpha") cfg.train.alpha = std::stod(value);
        else if (key == "train.batch") cfg.train.batch_size = std::stoi(value);
        else if (key == "train.max_steps") cfg.train.max_steps = std::stoull(value);
        else if (key == "train.buffer") cfg.train.buffer_capacity = std::stoull(value);
        else if (key == "train.max_episodes") cfg.train.max_episodes = std::stoi(value);
        else if (key == "train.decay_on_subgoal")
            cfg.train.decay_on_subgoal = parse_bool(value, key);
        else if (key == "run.seeds") cfg.seeds = parse_seeds(value);
        else if (key == "run.workers") cfg.workers = std::stoi(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (cfg.shaping != "none" && cfg.shaping != "state" && cfg.shaping != "lookback") {
        throw std::invalid_argument("config: shaping must be none|state|lookback");
    }
    if (cfg.abstraction != "hierarchical" && cfg.abstraction != "deterministic") {
        throw std::invalid_argument("config: abstraction must be hierarchical|deterministic");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "[experiment]\n"
        << "environment = " << c.environment << "\n"
        << "abstraction = " << c.abstraction << "\n"
        << "guidance = " << c.guidance << "\n"
        << "out = " << c.out_dir << "\n\n";
    out << "[env]\n"
        << "slip = " << c.slip << "\n"
        << "horizon = " << c.horizon << "\n"
        << "seed = " << c.env_seed << "\n\n";
    out << "[backend]\n"
        << "kind = " << c.backend << "\n"
        << "corruption = " << c.corruption << "\n"
        << "partial_subgoals = " << c.partial_subgoals << "\n";
    if (!c.fixture.empty()) out << "fixture = " << c.fixture << "\n";
    if (!c.http.url.empty()) {
        out << "url = " << c.http.url << "\n"
            << "model = " << c.http.model << "\n"
            << "temperature = " << c.http.temperature << "\n"
            << "timeout_s = " << c.http.timeout_s << "\n"
            << "retries = " << c.http.retries << "\n";
    }
    out << "\n[loop]\n"
        << "max_steps = " << c.budget_steps << "\n"
        << "max_backprompts = " << c.budget_backprompts << "\n\n";
    out << "[shaping]\n"
        << "mode = " << c.shaping << "\n"
        << "c = " << c.potential_scale << "\n"
        << "gamma_weighted = " << (c.gamma_weighted ? "true" : "false") << "\n"
        << "pure_state_potential = " << (c.pure_state_potential ? "true" : "false") << "\n\n";
    out << "[train]\n"
        << "gamma = " << c.train.gamma << "\n"
        << "alpha = " << c.train.alpha << "\n"
        << "batch = " << c.train.batch_size << "\n"
        << "max_steps = " << c.train.max_steps << "\n"
        << "buffer = " << c.train.buffer_capacity << "\n"
        << "max_episodes = " << c.train.max_episodes << "\n"
        << "decay_on_subgoal = " << (c.train.decay_on_subgoal ? "true" : "false") << "\n\n";
    out << "[run]\nseeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) {
        if (i) out << ',';
        out << c.seeds[i];
    }
    out << "\nworkers = " << c.workers << "\n";
    return out.str();
}

}  // namespace planshape::harness
