#include "sboost/config.hpp"

#include "sboost/error.hpp"
#include "sboost/inference.hpp"
#include "sboost/tsv.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <sstream>

namespace sboost {

namespace {

double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = std::string(trim(item));
        if (!t.empty()) out.push_back(to_real(key, t));
    }
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_real(v[k]);
    return out;
}

struct Entry {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define SB_REAL(name, member)                                                                 \
    Entry {                                                                                   \
        name, [](const RunConfig& c) { return format_real(c.member); },                       \
            [](RunConfig& c, const std::string& v) { c.member = to_real(name, v); }           \
    }
#define SB_INT(name, member, type)                                                            \
    Entry {                                                                                   \
        name, [](const RunConfig& c) { return std::to_string(c.member); },                    \
            [](RunConfig& c, const std::string& v) { c.member = to_int<type>(name, v); }      \
    }
#define SB_BOOL(name, member)                                                                 \
    Entry {                                                                                   \
        name, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },    \
            [](RunConfig& c, const std::string& v) { c.member = to_bool(name, v); }           \
    }
#define SB_TEXT(name, member)                                                                 \
    Entry {                                                                                   \
        name, [](const RunConfig& c) { return c.member; },                                    \
            [](RunConfig& c, const std::string& v) { c.member = v; }                          \
    }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        SB_TEXT("genotypes", genotypes),
        SB_TEXT("genes", genes),
        SB_TEXT("relevances", relevances),
        SB_TEXT("out_dir", out_dir),
        SB_INT("seed", seed, std::uint64_t),
        SB_REAL("maf.min", maf_min),
        SB_REAL("hwe.alpha", hwe_alpha),
        SB_TEXT("boosts.phi_mode", phi_mode),
        SB_REAL("boosts.phi", phi),
        SB_INT("boosts.region_gap", region_gap, long long),
        SB_REAL("em.kappa", em.kappa),
        SB_REAL("em.nu", em.nu),
        SB_REAL("em.lambda", em.lambda),
        SB_REAL("em.xi0", em.xi0),
        SB_REAL("em.xi1", em.xi1),
        SB_REAL("em.s", em.s),
        SB_INT("em.max_iter", filter.em.max_iter, int),
        SB_REAL("em.tol", filter.em.tol),
        SB_REAL("rank_tol", filter.em.rank_tol),
        SB_REAL("filter.fraction", filter.fraction),
        SB_INT("filter.max_rounds", filter.max_rounds, int),
        Entry{"filter.min_snps",
              [](const RunConfig& c) { return c.filter.min_snps ? std::to_string(*c.filter.min_snps) : "auto"; },
              [](RunConfig& c, const std::string& v) {
                  if (v == "auto") c.filter.min_snps.reset();
                  else c.filter.min_snps = to_int<std::size_t>("filter.min_snps", v);
              }},
        SB_BOOL("filter.stop_on_degrade", filter.stop_on_degrade),
        SB_REAL("gibbs.kappa", gibbs.kappa),
        SB_REAL("gibbs.nu", gibbs.nu),
        SB_REAL("gibbs.lambda", gibbs.lambda),
        SB_REAL("gibbs.xi0", gibbs.xi0),
        SB_REAL("gibbs.xi1", gibbs.xi1),
        SB_REAL("gibbs.s", gibbs.s),
        SB_INT("gibbs.iters", gibbs_iters, int),
        SB_INT("gibbs.burnin", gibbs_burnin, int),
        SB_INT("gibbs.threads", gibbs_threads, int),
        SB_BOOL("gibbs.record_draws", record_draws),
        SB_REAL("report.gamma", report_gamma),
        Entry{"report.gammas", [](const RunConfig& c) { return list_text(c.gammas); },
              [](RunConfig& c, const std::string& v) { c.gammas = to_list("report.gammas", v); }},
    };
    return table;
}

#undef SB_REAL
#undef SB_INT
#undef SB_BOOL
#undef SB_TEXT

} // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    for (const auto& e : entries())
        if (e.key == key) {
            e.set(config, value);
            return;
        }
    throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
}

std::string config_to_text(const RunConfig& config) {
    std::ostringstream out;
    for (const auto& e : entries()) out << e.key << " = " << e.get(config) << '\n';
    return out.str();
}

RunConfig parse_config(const std::string& text, const std::string& source, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, ln, "expected key = value");
        const std::string key(trim(body.substr(0, eq))), value(trim(body.substr(eq + 1)));
        try {
            set_config_value(base, key, value);
        } catch (const ConfigError& e) {
            throw ParseError(source, ln, e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    return parse_config(read_file(path), path, std::move(base));
}

void RunConfig::validate(bool check_paths) const {
    em.validate();
    gibbs.validate();
    if (!(phi > 0.0)) throw ConfigError("boosts.phi must be positive");
    if (phi_mode != "fit" && phi_mode != "fixed") throw ConfigError("boosts.phi_mode must be fit or fixed");
    if (region_gap < 1) throw ConfigError("boosts.region_gap must be positive");
    if (!(maf_min >= 0.0 && maf_min < 0.5)) throw ConfigError("maf.min must lie in [0, 0.5)");
    if (!(hwe_alpha >= 0.0 && hwe_alpha < 1.0)) throw ConfigError("hwe.alpha must lie in [0,1)");
    if (!(filter.fraction > 0.0 && filter.fraction < 1.0)) throw ConfigError("filter.fraction must lie in (0,1)");
    if (filter.max_rounds < 0) throw ConfigError("filter.max_rounds must be non-negative");
    if (filter.em.max_iter < 1 || !(filter.em.tol > 0.0)) throw ConfigError("em.max_iter and em.tol must be positive");
    if (gibbs_iters < 0) throw ConfigError("gibbs.iters must be non-negative");
    if (gibbs_iters > 0 && gibbs_burnin >= gibbs_iters) throw ConfigError("gibbs.burnin must be below gibbs.iters");
    if (gibbs_threads < 1) throw ConfigError("gibbs.threads must be at least 1");
    GainConfig{report_gamma}.validate();
    for (double g : gammas) GainConfig{g}.validate();
    if (check_paths) {
        if (genotypes.empty()) throw ConfigError("genotypes path is required");
        for (const auto* path : {&genotypes, &genes, &relevances})
            if (!path->empty() && !std::filesystem::exists(*path))
                throw ConfigError("input file not found: " + *path);
        if (!relevances.empty() && genes.empty()) throw ConfigError("relevances given without genes");
    }
}

GibbsOptions RunConfig::gibbs_options() const {
    GibbsOptions o;
    o.iters = gibbs_iters;
    if (gibbs_burnin >= 0) o.burnin = gibbs_burnin;
    o.seed = derive_seed(seed, "gibbs.chain0");
    o.rank_tol = filter.em.rank_tol;
    o.record_draws = record_draws;
    o.threads = gibbs_threads;
    return o;
}

} // namespace sboost
