#include "ctxchain/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ctxchain {

const char* regime_name(Regime r) {
    return r == Regime::clean ? "clean" : "noisy";
}

void ScenarioConfig::set_regime(Regime r) {
    regime = r;
    net = r == Regime::clean ? NetworkParams::clean() : NetworkParams::noisy();
}

double ScenarioConfig::rejoin_time() const {
    return partition.enabled ? partition.end : 0.0;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (n_nodes < 2) fail("N: need at least 2 nodes");
    if (!(sim_time > 0.0)) fail("sim_time: must be > 0");
    if (!(block_interval > 0.0)) fail("block_interval: must be > 0");
    if (!(k_converge >= 0.0)) fail("k_converge: must be >= 0");
    if (!(metric_period > 0.0)) fail("metric_period: must be > 0");
    if (!(gossip_period > 0.0)) fail("gossip_period: must be > 0");
    if (per_block_bytes == 0) fail("per_block_bytes: must be > 0");
    if (seeds == 0) fail("seeds: must be >= 1");
    if (!(variant.q_threshold >= 0.0 && variant.q_threshold <= 1.0)) fail("variant.q_threshold: must lie in [0, 1]");
    try {
        net.validate();
        protocol.validate();
        if (partition.enabled) PartitionSchedule::split(n_nodes, partition.ratio, partition.start, partition.end)
                                   .validate(n_nodes);
    } catch (const ContractViolation& e) {
        fail(e.what());
    }
    if (poc) {
        if (poc->budgets.empty()) fail("poc.budgets: need at least one budget");
        for (auto b : poc->budgets)
            if (b == 0) fail("poc.budgets: budgets must be >= 1");
        if (!(poc->challenge_period > 0.0)) fail("poc.challenge_period: must be > 0");
        if (poc->memory.c0 == 0 || poc->memory.c1 == 0) fail("poc.c0/poc.c1: must be > 0");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(fmt::format("{}: expected a number, got \"{}\"", key, v));
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    // from_chars for double is available in libstdc++ 11.
    return parse_number<double>(key, v);
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(fmt::format("{}: expected true/false, got \"{}\"", key, v));
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
    const std::string v(trim(value));
    auto& p = cfg.protocol;
    if (key == "scenario") cfg.scenario = v;
    else if (key == "N") cfg.n_nodes = parse_number<std::size_t>(key, v);
    else if (key == "sim_time") cfg.sim_time = parse_real(key, v);
    else if (key == "block_interval") cfg.block_interval = parse_real(key, v);
    else if (key == "regime") {
        if (v == "clean") cfg.set_regime(Regime::clean);
        else if (v == "noisy") cfg.set_regime(Regime::noisy);
        else throw ConfigError(fmt::format("regime: expected clean or noisy, got \"{}\"", v));
    }
    else if (key == "net.drop_prob") cfg.net.drop_prob = parse_real(key, v);
    else if (key == "net.delay_mean") cfg.net.delay_mean = parse_real(key, v);
    else if (key == "net.delay_jitter") cfg.net.delay_jitter = parse_real(key, v);
    else if (key == "partition.enabled") cfg.partition.enabled = parse_bool(key, v);
    else if (key == "partition.start") cfg.partition.start = parse_real(key, v);
    else if (key == "partition.end") cfg.partition.end = parse_real(key, v);
    else if (key == "partition.ratio") cfg.partition.ratio = v;
    else if (key == "variant") {
        const double q = cfg.variant.q_threshold;
        try {
            cfg.variant = SyncVariant::parse(v);
        } catch (const ContractViolation& e) {
            throw ConfigError(std::string("variant: ") + e.what());
        }
        cfg.variant.q_threshold = q;
    }
    else if (key == "variant.normal_pairs") {
        cfg.variant.normal_pairs = parse_number<std::uint32_t>(key, v);
        cfg.variant.budget_in_name = true;
    }
    else if (key == "variant.quarantine_pairs") {
        cfg.variant.quarantine_pairs = parse_number<std::uint32_t>(key, v);
        cfg.variant.budget_in_name = true;
    }
    else if (key == "variant.q_threshold") cfg.variant.q_threshold = parse_real(key, v);
    else if (key == "protocol.epoch_len") p.epoch_len = parse_number<std::uint32_t>(key, v);
    else if (key == "protocol.cp_mode") {
        if (v == "height") p.cp_mode = CheckpointMode::height;
        else if (v == "time") p.cp_mode = CheckpointMode::time;
        else throw ConfigError(fmt::format("protocol.cp_mode: expected height or time, got \"{}\"", v));
    }
    else if (key == "protocol.alpha") p.alpha = parse_real(key, v);
    else if (key == "protocol.t_on") p.t_on = parse_real(key, v);
    else if (key == "protocol.t_off") p.t_off = parse_real(key, v);
    else if (key == "protocol.off_streak") p.off_streak = parse_number<std::uint32_t>(key, v);
    else if (key == "protocol.tail_len") p.tail_len = parse_number<std::uint32_t>(key, v);
    else if (key == "protocol.window") p.window = parse_number<std::size_t>(key, v);
    else if (key == "protocol.score_margin") p.score_margin = parse_real(key, v);
    else if (key == "protocol.log_base") {
        if (v == "e" || v == "natural") p.log_base = LogBase::natural;
        else if (v == "10") p.log_base = LogBase::ten;
        else throw ConfigError(fmt::format("protocol.log_base: expected e or 10, got \"{}\"", v));
    }
    else if (key == "k_converge") cfg.k_converge = parse_real(key, v);
    else if (key == "convergence_stamp") {
        if (v == "onset") cfg.stamp = ConvergenceStamp::onset;
        else if (v == "detection") cfg.stamp = ConvergenceStamp::detection;
        else throw ConfigError(fmt::format("convergence_stamp: expected onset or detection, got \"{}\"", v));
    }
    else if (key == "metric_period") cfg.metric_period = parse_real(key, v);
    else if (key == "gossip_period") cfg.gossip_period = parse_real(key, v);
    else if (key == "count_lost_pairs") cfg.count_lost_pairs = parse_bool(key, v);
    else if (key == "per_block_bytes") cfg.per_block_bytes = parse_number<std::uint64_t>(key, v);
    else if (key == "seeds") cfg.seeds = parse_number<std::size_t>(key, v);
    else if (key == "base_seed") cfg.base_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "poc.enabled") {
        if (parse_bool(key, v)) {
            if (!cfg.poc) cfg.poc.emplace();
        } else {
            cfg.poc.reset();
        }
    }
    else if (key == "poc.budgets") {
        if (!cfg.poc) cfg.poc.emplace();
        cfg.poc->budgets.clear();
        std::string_view rest = v;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            cfg.poc->budgets.push_back(parse_number<std::uint32_t>(key, item));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    else if (key == "poc.challenge_period") {
        if (!cfg.poc) cfg.poc.emplace();
        cfg.poc->challenge_period = parse_real(key, v);
    }
    else if (key == "poc.c0") {
        if (!cfg.poc) cfg.poc.emplace();
        cfg.poc->memory.c0 = parse_number<std::uint64_t>(key, v);
    }
    else if (key == "poc.c1") {
        if (!cfg.poc) cfg.poc.emplace();
        cfg.poc->memory.c1 = parse_number<std::uint64_t>(key, v);
    }
    else throw ConfigError(fmt::format("unknown configuration key \"{}\"", key));
}

ScenarioConfig parse_config(std::string_view text, ScenarioConfig cfg) {
    std::vector<std::pair<std::string, std::string>> settings;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected key=value, got \"{}\"", lineno, l));
        settings.emplace_back(std::string(trim(l.substr(0, eq))), std::string(trim(l.substr(eq + 1))));
    }
    for (const auto& [k, v] : settings)
        if (k == "regime") apply_setting(cfg, k, v);
    for (const auto& [k, v] : settings)
        if (k != "regime") apply_setting(cfg, k, v);
    return cfg;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

std::string format_config(const ScenarioConfig& c) {
    const auto& p = c.protocol;
    std::string out;
    auto line = [&out](std::string_view k, const std::string& v) { out += fmt::format("{}={}\n", k, v); };
    line("scenario", c.scenario);
    line("N", std::to_string(c.n_nodes));
    line("sim_time", fmt::format("{}", c.sim_time));
    line("block_interval", fmt::format("{}", c.block_interval));
    line("regime", regime_name(c.regime));
    line("net.drop_prob", fmt::format("{}", c.net.drop_prob));
    line("net.delay_mean", fmt::format("{}", c.net.delay_mean));
    line("net.delay_jitter", fmt::format("{}", c.net.delay_jitter));
    line("partition.enabled", c.partition.enabled ? "true" : "false");
    line("partition.start", fmt::format("{}", c.partition.start));
    line("partition.end", fmt::format("{}", c.partition.end));
    line("partition.ratio", c.partition.ratio);
    line("variant", c.variant.name());
    line("variant.q_threshold", fmt::format("{}", c.variant.q_threshold));
    line("protocol.epoch_len", std::to_string(p.epoch_len));
    line("protocol.cp_mode", p.cp_mode == CheckpointMode::height ? "height" : "time");
    line("protocol.alpha", fmt::format("{}", p.alpha));
    line("protocol.t_on", fmt::format("{}", p.t_on));
    line("protocol.t_off", fmt::format("{}", p.t_off));
    line("protocol.off_streak", std::to_string(p.off_streak));
    line("protocol.tail_len", std::to_string(p.tail_len));
    line("protocol.window", std::to_string(p.window));
    line("protocol.score_margin", fmt::format("{}", p.score_margin));
    line("protocol.log_base", p.log_base == LogBase::natural ? "e" : "10");
    line("k_converge", fmt::format("{}", c.k_converge));
    line("convergence_stamp", c.stamp == ConvergenceStamp::onset ? "onset" : "detection");
    line("metric_period", fmt::format("{}", c.metric_period));
    line("gossip_period", fmt::format("{}", c.gossip_period));
    line("count_lost_pairs", c.count_lost_pairs ? "true" : "false");
    line("per_block_bytes", std::to_string(c.per_block_bytes));
    line("seeds", std::to_string(c.seeds));
    line("base_seed", std::to_string(c.base_seed));
    if (c.poc) {
        std::string budgets;
        for (std::size_t i = 0; i < c.poc->budgets.size(); ++i)
            budgets += (i ? "," : "") + std::to_string(c.poc->budgets[i]);
        line("poc.budgets", budgets);
        line("poc.challenge_period", fmt::format("{}", c.poc->challenge_period));
        line("poc.c0", std::to_string(c.poc->memory.c0));
        line("poc.c1", std::to_string(c.poc->memory.c1));
    }
    return out;
}

}  // namespace ctxchain
