#include "erpia/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace erpia {
namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& text, std::size_t line) {
    double v = 0.0;
    const auto s = trim(text);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        fail(line, "expected a number, got '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& text, std::size_t line) {
    std::uint64_t v = 0;
    const auto s = trim(text);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        fail(line, "expected a non-negative integer, got '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

} // namespace

ConfigDocument ConfigDocument::parse(std::istream& in) {
    ConfigDocument doc;
    std::string raw;
    std::string section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto text = raw;
        if (const auto hash = text.find_first_of("#;"); hash != std::string::npos) text.erase(hash);
        text = trim(text);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') fail(line, "unterminated section header");
            section = lower(trim(text.substr(1, text.size() - 2)));
            if (section.empty()) fail(line, "empty section name");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const auto key = lower(trim(text.substr(0, eq)));
        if (key.empty()) fail(line, "missing key");
        if (section.empty()) fail(line, "key '" + key + "' outside of any section");
        doc.entries_[section + "." + key].push_back({trim(text.substr(eq + 1)), line});
    }
    return doc;
}

ConfigDocument ConfigDocument::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in);
}

const std::vector<ConfigDocument::Entry>& ConfigDocument::all(const std::string& key) const {
    static const std::vector<Entry> none;
    const auto it = entries_.find(key);
    return it == entries_.end() ? none : it->second;
}

const ConfigDocument::Entry* ConfigDocument::find(const std::string& key) const {
    const auto& e = all(key);
    if (e.empty()) return nullptr;
    if (e.size() > 1) fail(e[1].line, "duplicate key '" + key + "'");
    return &e.front();
}

std::string ConfigDocument::get_string(const std::string& key, const std::string& fallback) const {
    const auto* e = find(key);
    return e ? lower(e->value) : fallback;
}

double ConfigDocument::get_double(const std::string& key, double fallback) const {
    const auto* e = find(key);
    return e ? to_double(e->value, e->line) : fallback;
}

std::size_t ConfigDocument::get_size(const std::string& key, std::size_t fallback) const {
    const auto* e = find(key);
    return e ? static_cast<std::size_t>(to_u64(e->value, e->line)) : fallback;
}

std::uint64_t ConfigDocument::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto* e = find(key);
    return e ? to_u64(e->value, e->line) : fallback;
}

bool ConfigDocument::get_bool(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    const auto v = lower(e->value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(e->line, "expected a boolean, got '" + e->value + "'");
}

std::vector<double> ConfigDocument::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split(e->value, ',')) out.push_back(to_double(item, e->line));
    if (out.empty()) fail(e->line, "empty list for '" + key + "'");
    return out;
}

std::vector<std::string> ConfigDocument::unknown_keys(const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [key, entries] : entries_)
        if (std::find(known.begin(), known.end(), key) == known.end())
            out.push_back("line " + std::to_string(entries.front().line) + ": " + key);
    return out;
}

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = {
        "model.s0",         "model.r",           "model.delta",        "model.sigma",
        "payoff.kind",      "payoff.strike",     "payoff.cap",         "grid.t",
        "grid.n",           "run.method",        "run.paths",          "run.seed",
        "run.basis",        "run.degree",        "run.payoff_feature", "run.step_rule", "run.init",
        "run.penalty",      "run.lattice_steps", "run.antithetic",     "run.out_of_sample",
        "run.dual_bound",   "run.fresh_seed",    "schedule.stage",     "schedule.lambda",
        "schedule.iters",
        "experiment.s0_list", "experiment.lambdas", "experiment.iters_per_stage",
        "experiment.iterations"};
    return keys;
}

namespace {
bool names_word(const std::string& text, const std::string& word) {
    auto inner = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; };
    for (auto at = text.find(word); at != std::string::npos; at = text.find(word, at + 1)) {
        const auto end = at + word.size();
        if ((at == 0 || !inner(text[at - 1])) && (end == text.size() || !inner(text[end]))) return true;
    }
    return false;
}
} // namespace

RunConfig run_config_from(const ConfigDocument& doc) {
    RunConfig c;
    auto line_of = [&](const std::string& key) {
        const auto* e = doc.find(key);
        return e ? e->line : std::size_t{0};
    };
    // an error goes to the line of the key it names, else the first key present
    auto checked = [&](std::initializer_list<const char*> keys, auto&& build) {
        try {
            build();
        } catch (const ConfigError& err) {
            const std::string what = err.what();
            std::size_t line = 0;
            for (std::string key : keys)
                if (names_word(what, key.substr(key.find('.') + 1)) && (line = line_of(key)) != 0) break;
            for (const char* key : keys)
                if (line == 0) line = line_of(key);
            if (line == 0 || what.rfind("config line", 0) == 0) throw;
            fail(line, what);
        }
    };

    checked({"model.sigma", "model.r", "model.delta", "model.s0"}, [&] {
        c.model = MarketModel(doc.get_doubles("model.s0", {100.0}), doc.get_double("model.r", 0.05),
                              doc.get_double("model.delta", 0.0), doc.get_double("model.sigma", 0.2));
    });

    const auto kind = doc.get_string("payoff.kind", "maxcall");
    if (kind == "maxcall" || kind == "max_call") c.payoff.kind = PayoffKind::MaxCall;
    else if (kind == "put") c.payoff.kind = PayoffKind::Put;
    else if (kind == "zero") c.payoff.kind = PayoffKind::Zero;
    else fail(line_of("payoff.kind"), "unknown payoff kind '" + kind + "'");
    c.payoff.strike = doc.get_double("payoff.strike", 100.0);
    c.payoff.cap = doc.get_double("payoff.cap", 0.0);
    checked({"payoff.kind", "model.s0"}, [&] { c.payoff.check_dim(c.model.dim()); });

    checked({"grid.n", "grid.t"}, [&] { c.grid = TimeGrid(doc.get_double("grid.t", 1.0), doc.get_size("grid.n", 100)); });

    const auto method = doc.get_string("run.method", "pia");
    if (method == "pia") c.method = Method::PIA;
    else if (method == "classical" || method == "classicalpenalization") c.method = Method::ClassicalPenalization;
    else if (method == "lattice") c.method = Method::Lattice;
    else if (method == "european") c.method = Method::European;
    else fail(line_of("run.method"), "unknown method '" + method + "'");

    c.paths = doc.get_size("run.paths", c.paths);
    c.seed = doc.get_u64("run.seed", c.seed);
    const auto basis = doc.get_string("run.basis", c.model.dim() == 2 ? "ab13" : "poly");
    if (basis == "ab13") c.basis.kind = BasisKind::AndersenBroadie13;
    else if (basis == "poly" || basis == "polynomial") c.basis.kind = BasisKind::Polynomial;
    else fail(line_of("run.basis"), "unknown basis '" + basis + "'");
    c.basis.degree = doc.get_size("run.degree", 3);
    c.basis.payoff_feature = doc.get_bool("run.payoff_feature", c.basis.kind == BasisKind::Polynomial);

    const auto rule = doc.get_string("run.step_rule", "exponential");
    if (rule == "exponential") c.step_rule = StepRule::Exponential;
    else if (rule == "backward_euler" || rule == "implicit") c.step_rule = StepRule::BackwardEuler;
    else fail(line_of("run.step_rule"), "unknown step rule '" + rule + "'");

    const auto init = doc.get_string("run.init", "european");
    if (init == "european") c.init = SurfaceInit::European;
    else if (init == "never_stop") c.init = SurfaceInit::NeverStop;
    else fail(line_of("run.init"), "unknown init '" + init + "'");

    c.penalty = doc.get_double("run.penalty", 0.0);
    c.lattice_steps = doc.get_size("run.lattice_steps", 0);
    c.antithetic = doc.get_bool("run.antithetic", false);
    c.out_of_sample = doc.get_bool("run.out_of_sample", false);
    c.dual_bound = doc.get_bool("run.dual_bound", false);
    c.fresh_seed = doc.get_u64("run.fresh_seed", 0);

    std::vector<ScheduleStage> stages;
    for (const auto& e : doc.all("schedule.stage")) {
        const auto parts = split(e.value, ',');
        if (parts.size() != 2) fail(e.line, "stage must be 'lambda, iterations'");
        stages.push_back({to_double(parts[0], e.line), static_cast<std::size_t>(to_u64(parts[1], e.line))});
    }
    if (stages.empty() && doc.has("schedule.lambda"))
        stages.push_back({doc.get_double("schedule.lambda", 0.01), doc.get_size("schedule.iters", 2000)});
    if (stages.empty()) {
        c.schedule = LambdaSchedule::ladder(kDefaultLadder, 0.001, 500);
    } else {
        const auto& entries = doc.all("schedule.stage");
        const auto line = entries.empty() ? line_of("schedule.lambda") : entries.front().line;
        try {
            c.schedule = LambdaSchedule(std::move(stages));
        } catch (const ConfigError& err) {
            fail(line, err.what());
        }
    }

    const auto unknown = doc.unknown_keys(run_config_keys());
    if (!unknown.empty()) throw ConfigError("config " + unknown.front() + ": unknown key");

    try {
        c.validate();
    } catch (const ConfigError& err) {
        throw ConfigError(std::string("config: ") + err.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path) { return run_config_from(ConfigDocument::load(path)); }

} // namespace erpia
