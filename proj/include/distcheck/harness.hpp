// Copyright 2026 The distcheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "distcheck/access.hpp"
#include "distcheck/dist.hpp"
#include "distcheck/qme.hpp"
#include "distcheck/reduce.hpp"
#include "distcheck/rng.hpp"
#include "distcheck/testers.hpp"

namespace distcheck {

inline constexpr int kCsvSchemaVersion = 1;

/// Wilson score interval for a binomial proportion.
struct Interval {
    double lo;
    double hi;
};

inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) throw std::invalid_argument("wilson: no trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Formats a double so that it round-trips; integers print without exponent.
inline std::string format_real(double x) {
    char buf[32];
    if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", x);
    else
        std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Pmf files ------------------------------------------------------------------

/// A pmf file is a JSON array of probabilities, or an object {"probs": [...]}.
inline Pmf pmf_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_object() ? j.at("probs") : j;
    if (!arr.is_array()) throw std::invalid_argument("pmf json: expected an array of probabilities");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_number()) throw std::invalid_argument("pmf json: entries must be numbers");
        v.push_back(e.get<double>());
    }
    return Pmf(std::move(v));
}

inline Pmf read_pmf_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open pmf file: " + path);
    try {
        return pmf_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("pmf json: " + std::string(e.what()));
    }
}

inline void write_pmf_json(std::ostream& out, const Pmf& p) {
    out << '[';
    for (std::size_t i = 0; i < p.k(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", p[i]);
        out << (i ? "," : "") << buf;
    }
    out << "]\n";
}

// Configuration --------------------------------------------------------------

enum class Command { Uniformity, Identity, ClosenessL2 };
enum class Regime { Large, Small, Giant, Classical };

inline std::string_view to_string(Command c) {
    switch (c) {
        case Command::Uniformity: return "test-uniformity";
        case Command::Identity: return "test-identity";
        case Command::ClosenessL2: return "test-closeness-l2";
    }
    return "?";
}

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Large: return "large";
        case Regime::Small: return "small";
        case Regime::Giant: return "giant";
        case Regime::Classical: return "classical";
    }
    return "?";
}

inline Command parse_command(std::string_view s) {
    if (s == "test-uniformity") return Command::Uniformity;
    if (s == "test-identity") return Command::Identity;
    if (s == "test-closeness-l2") return Command::ClosenessL2;
    throw std::invalid_argument("unknown command: " + std::string(s));
}

inline Regime parse_regime(std::string_view s) {
    if (s == "large") return Regime::Large;
    if (s == "small") return Regime::Small;
    if (s == "giant") return Regime::Giant;
    if (s == "classical") return Regime::Classical;
    throw std::invalid_argument("unknown regime: " + std::string(s));
}

/// One tested instance. `against` is the second distribution for the l2
/// closeness tester (uniform by default); `noise` overrides the global QME
/// noise for this instance only.
struct InstanceEntry {
    InstanceSpec spec = Uniform{};
    InstanceSpec against = Uniform{};
    std::optional<NoiseMode> noise;

    std::string name() const {
        std::string s = label(spec);
        if (!std::holds_alternative<Uniform>(against)) s += "~" + label(against);
        return s;
    }
};

/// Parses "spec", "spec@noise", "spec~against" or "spec~against@noise".
inline InstanceEntry parse_instance_entry(std::string_view text) {
    InstanceEntry e;
    const auto at = text.find('@');
    if (at != std::string_view::npos) {
        e.noise = parse_noise(text.substr(at + 1));
        text = text.substr(0, at);
    }
    const auto tilde = text.find('~');
    if (tilde != std::string_view::npos) {
        e.against = parse_instance(text.substr(tilde + 1));
        text = text.substr(0, tilde);
    }
    e.spec = parse_instance(text);
    return e;
}

struct ExperimentConfig {
    Command command = Command::Uniformity;
    Regime regime = Regime::Large;
    std::size_t k = 1000;
    std::optional<double> epsilon, gamma, tau, theta;
    std::vector<InstanceEntry> instances;
    std::optional<std::string> reference_path;      // test-identity
    std::optional<Pmf> reference;                   // test-identity, resolved
    std::optional<std::string> string_oracle_path;  // tests this string instead of instances
    LargeConfig large{};
    SmallConfig small{};
    GiantConfig giant{};
    ClassicalConfig classical{};
    QmeBackend backend = QmeBackend::IdealOracle;
    NoiseMode noise{};
    std::uint64_t cost_constant = 1;
    long long trials = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool timing = false;

    /// Pushes the command-level parameters into the tester configs and checks
    /// every precondition. Throws std::invalid_argument on any violation.
    void resolve() {
        if (trials < 1) throw std::invalid_argument("trials must be at least 1");
        if (k == 0) throw std::invalid_argument("k must be positive");
        if (jobs == 0) throw std::invalid_argument("jobs must be at least 1");
        if (instances.empty() && !string_oracle_path) instances.push_back(InstanceEntry{});

        large.qme.backend = backend;
        large.qme.noise = noise;
        large.qme.cost_constant = cost_constant;
        small.backend = backend;
        small.noise = noise;
        small.cost_constant = cost_constant;

        if (command == Command::Identity) {
            if (!epsilon) throw std::invalid_argument("test-identity needs --epsilon");
            if (!(*epsilon > 0.0 && *epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
            if (!reference && reference_path) reference = read_pmf_json(*reference_path);
            if (!reference) reference = Pmf::uniform(k);
            if (reference->k() != k) throw std::invalid_argument("reference pmf has a different k");
        } else if (command == Command::ClosenessL2) {
            if (!tau) throw std::invalid_argument("test-closeness-l2 needs --tau");
            small.tau = *tau;
            small.validate();
        } else {
            switch (regime) {
                case Regime::Large:
                    if (gamma) large.gamma = *gamma;
                    else if (theta) large.gamma = *theta;
                    large.validate(k);
                    break;
                case Regime::Small:
                    if (tau) small.tau = *tau;
                    small.validate();
                    break;
                case Regime::Giant:
                    if (theta) giant.theta = *theta;
                    giant.validate(k);
                    break;
                case Regime::Classical:
                    if (epsilon) classical.epsilon = *epsilon;
                    classical.validate();
                    break;
            }
        }
        for (const auto& e : instances) {
            (void)make_instance(k, e.spec);
            (void)make_instance(k, e.against);
        }
    }

    std::string regime_name() const {
        if (command == Command::ClosenessL2) return "small";
        if (command == Command::Identity) return "reduced";
        return std::string(to_string(regime));
    }
};

/// Applies a JSON document onto `cfg`. Keys absent from the document leave
/// the corresponding fields untouched, so flags parsed afterwards take
/// precedence over the file and the file over built-in defaults.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
        if (j.contains("command")) cfg.command = parse_command(j["command"].get<std::string>());
        if (j.contains("regime")) cfg.regime = parse_regime(j["regime"].get<std::string>());
        if (j.contains("k")) cfg.k = j["k"].get<std::size_t>();
        if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
        if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
        if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
        if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
        if (j.contains("trials")) cfg.trials = j["trials"].get<long long>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("jobs")) cfg.jobs = j["jobs"].get<unsigned>();
        if (j.contains("qme_backend")) cfg.backend = parse_backend(j["qme_backend"].get<std::string>());
        if (j.contains("qme_noise")) cfg.noise = parse_noise(j["qme_noise"].get<std::string>());
        if (j.contains("qme_cost_constant")) cfg.cost_constant = j["qme_cost_constant"].get<std::uint64_t>();
        if (j.contains("reference")) {
            const auto& r = j["reference"];
            if (r.is_string()) cfg.reference_path = r.get<std::string>();
            else cfg.reference = pmf_from_json(r);
        }
        if (j.contains("string_oracle")) cfg.string_oracle_path = j["string_oracle"].get<std::string>();
        if (j.contains("instances")) {
            cfg.instances.clear();
            for (const auto& e : j["instances"]) {
                if (e.is_string()) {
                    cfg.instances.push_back(parse_instance_entry(e.get<std::string>()));
                    continue;
                }
                InstanceEntry entry;
                entry.spec = parse_instance(e.at("spec").get<std::string>());
                if (e.contains("against")) entry.against = parse_instance(e["against"].get<std::string>());
                if (e.contains("noise")) entry.noise = parse_noise(e["noise"].get<std::string>());
                cfg.instances.push_back(entry);
            }
        }
        if (j.contains("large")) {
            const auto& l = j["large"];
            if (l.contains("B")) cfg.large.B = l["B"].get<double>();
            if (l.contains("c_const")) cfg.large.c_const = l["c_const"].get<double>();
            if (l.contains("C_const")) cfg.large.C_const = l["C_const"].get<double>();
            if (l.contains("delta")) cfg.large.qme.delta = l["delta"].get<double>();
            if (l.contains("n")) cfg.large.n_override = l["n"].get<std::uint64_t>();
        }
        if (j.contains("small")) {
            const auto& s = j["small"];
            if (s.contains("T")) cfg.small.T = s["T"].get<std::uint64_t>();
            if (s.contains("theta_star")) cfg.small.theta_star = s["theta_star"].get<double>();
            if (s.contains("per_estimate_precision"))
                cfg.small.per_estimate_precision = s["per_estimate_precision"].get<double>();
            if (s.contains("delta_round")) cfg.small.delta_round = s["delta_round"].get<double>();
            if (s.contains("vote_threshold")) cfg.small.vote_threshold = s["vote_threshold"].get<double>();
        }
        if (j.contains("giant")) {
            const auto& g = j["giant"];
            if (g.contains("a_coef")) cfg.giant.a_coef = g["a_coef"].get<double>();
            if (g.contains("c_close")) cfg.giant.c_close = g["c_close"].get<double>();
        }
        if (j.contains("classical")) {
            const auto& c = j["classical"];
            if (c.contains("sample_constant")) cfg.classical.sample_constant = c["sample_constant"].get<double>();
            if (c.contains("m")) cfg.classical.m_override = c["m"].get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    apply_json(cfg, j);
}

// Trials ---------------------------------------------------------------------

struct TrialReport {
    std::uint64_t trial_index = 0;
    std::string instance;
    Decision decision = Decision::Accept;
    Reason reason = Reason::MeanThreshold;
    std::optional<double> mu_hat;
    std::uint64_t code_uses = 0;
    std::uint64_t budget = 0;  // declared cost of the branch taken
    std::optional<std::uint64_t> max_count;
    std::optional<std::uint64_t> modeled_quantum_queries;
    double wall_time = 0.0;
};

struct InstanceSummary {
    std::string instance;
    std::uint64_t trials = 0;
    std::uint64_t accepts = 0;
    double accept_rate = 0.0;
    Interval interval{0.0, 0.0};
    double mean_code_uses = 0.0;
};

struct ExperimentResult {
    std::vector<TrialReport> reports;  // instance-major, then trial order
    std::vector<InstanceSummary> summaries;
};

/// Declared code-use cost of the large-regime branch recorded in `v`.
inline std::uint64_t large_declared_cost(const Verdict& v, const QmeConfig& base) {
    auto n = static_cast<std::uint64_t>(v.diagnostics.at("n"));
    if (!v.mu_hat) return n;
    QmeConfig q = base;
    q.n = static_cast<std::uint64_t>(v.diagnostics.at("qme_n"));
    return n + qme_cost(q);
}

namespace detail {

inline InstanceSummary summarize(const std::string& name, const std::vector<TrialReport>& rows, std::size_t from,
                                 std::size_t count) {
    InstanceSummary s;
    s.instance = name;
    s.trials = count;
    double uses = 0.0;
    for (std::size_t i = from; i < from + count; ++i) {
        if (rows[i].decision == Decision::Accept) ++s.accepts;
        uses += static_cast<double>(rows[i].code_uses);
    }
    s.accept_rate = static_cast<double>(s.accepts) / static_cast<double>(count);
    s.interval = wilson_interval(s.accepts, count);
    s.mean_code_uses = uses / static_cast<double>(count);
    return s;
}

/// Runs f(i) for i in [0, count) on `jobs` workers. Each index is written by
/// exactly one worker, so callers store results by index.
template <typename F>
void parallel_for(std::size_t count, unsigned jobs, F&& f) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// A prepared instance: the code factory for one row group.
struct PreparedInstance {
    std::string name;
    std::function<SourceCode(std::uint64_t)> code_p;
    std::optional<Pmf> q;  // closeness partner
    NoiseMode noise;
};

inline std::vector<PreparedInstance> prepare_instances(const ExperimentConfig& cfg) {
    std::vector<PreparedInstance> out;
    if (cfg.string_oracle_path) {
        auto x = std::make_shared<const StringOracle>(read_string_oracle(*cfg.string_oracle_path));
        if (x->k != cfg.k) throw std::invalid_argument("string oracle k differs from --k");
        PreparedInstance p;
        p.name = "string:" + *cfg.string_oracle_path;
        p.code_p = [x](std::uint64_t seed) { return code_from_string(*x, seed); };
        p.noise = cfg.noise;
        if (cfg.command == Command::ClosenessL2 || cfg.regime == Regime::Small) p.q = Pmf::uniform(cfg.k);
        out.push_back(std::move(p));
    }
    for (const auto& e : cfg.instances) {
        PreparedInstance p;
        p.name = e.name();
        if (const auto* r = std::get_if<RTo1String>(&e.spec)) {
            auto x = std::make_shared<const StringOracle>(rto1_string(cfg.k, r->r));
            p.code_p = [x](std::uint64_t seed) { return code_from_string(*x, seed); };
        } else {
            Pmf pmf = make_instance(cfg.k, e.spec);
            p.code_p = [pmf](std::uint64_t seed) { return code_from_pmf(pmf, seed); };
        }
        if (cfg.command == Command::ClosenessL2 || (cfg.command == Command::Uniformity && cfg.regime == Regime::Small))
            p.q = make_instance(cfg.k, e.against);
        p.noise = e.noise.value_or(cfg.noise);
        out.push_back(std::move(p));
    }
    return out;
}

/// One trial of `inst`. Streams: the code under test is seeded from
/// (seed, trial, name + "/code"), the closeness partner from "/partner", and
/// the tester's own randomness from "/qme".
inline TrialReport run_one_trial(const ExperimentConfig& cfg, const PreparedInstance& inst, std::uint64_t trial) {
    const auto t0 = std::chrono::steady_clock::now();
    Stream code_seed = Stream::derive(cfg.seed, trial, inst.name + "/code");
    Stream qme_rng = Stream::derive(cfg.seed, trial, inst.name + "/qme");
    SourceCode code = inst.code_p(code_seed());

    TrialReport r;
    r.trial_index = trial;
    r.instance = inst.name;
    Verdict v;

    auto run_small_against = [&](SmallConfig small) {
        small.noise = inst.noise;
        Stream partner_seed = Stream::derive(cfg.seed, trial, inst.name + "/partner");
        SourceCode code_q = code_from_pmf(*inst.q, partner_seed());
        v = run_small(code, code_q, cfg.k, small, qme_rng);
        r.budget = 2 * small.T * qme_cost(small.qme());
    };

    if (cfg.command == Command::ClosenessL2) {
        run_small_against(cfg.small);
    } else if (cfg.command == Command::Identity) {
        IdentityConfigs ic{cfg.large, cfg.small};
        ic.large.qme.noise = inst.noise;
        ic.small.noise = inst.noise;
        v = identity_test(*cfg.reference, code, *cfg.epsilon, ic, qme_rng);
        if (v.diagnostics.at("regime_large") > 0.5) {
            r.budget = large_declared_cost(v, ic.large.qme);
        } else {
            SmallConfig s = ic.small;
            s.tau = 2.0 * v.diagnostics.at("epsilon_out") / std::sqrt(4.0 * static_cast<double>(cfg.k));
            r.budget = 2 * s.T * qme_cost(s.qme());
        }
    } else {
        switch (cfg.regime) {
            case Regime::Large: {
                LargeConfig l = cfg.large;
                l.qme.noise = inst.noise;
                v = run_large(code, cfg.k, l, qme_rng);
                r.budget = large_declared_cost(v, l.qme);
                break;
            }
            case Regime::Small: run_small_against(cfg.small); break;
            case Regime::Giant:
                v = run_giant(code, cfg.k, cfg.giant);
                r.budget = giant_sample_size(cfg.k, cfg.giant);
                r.modeled_quantum_queries = ceil_pow_two_thirds(r.budget);
                break;
            case Regime::Classical:
                v = classical_baseline(code, cfg.k, cfg.classical);
                r.budget = classical_sample_size(cfg.k, cfg.classical);
                break;
        }
    }
    r.decision = v.decision;
    r.reason = v.reason;
    r.mu_hat = v.mu_hat;
    r.code_uses = v.code_uses;
    if (auto it = v.diagnostics.find("max_count"); it != v.diagnostics.end())
        r.max_count = static_cast<std::uint64_t>(it->second);
    else if (v.counts)
        r.max_count = v.counts->max_count();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Runs cfg.trials trials of every instance. The output depends only on the
/// config, never on `jobs` or scheduling.
inline ExperimentResult run_trials(ExperimentConfig cfg) {
    cfg.resolve();
    const auto instances = prepare_instances(cfg);
    const auto trials = static_cast<std::size_t>(cfg.trials);
    ExperimentResult res;
    res.reports.resize(instances.size() * trials);
    detail::parallel_for(res.reports.size(), cfg.jobs, [&](std::size_t idx) {
        res.reports[idx] = run_one_trial(cfg, instances[idx / trials], idx % trials);
    });
    for (std::size_t i = 0; i < instances.size(); ++i)
        res.summaries.push_back(detail::summarize(instances[i].name, res.reports, i * trials, trials));
    return res;
}

// Output ---------------------------------------------------------------------

inline void write_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res,
                      bool with_timing = false) {
    out << "schema_version,command,regime,instance,trial,decision,reason,mu_hat,code_uses,budget,max_count,"
           "modeled_quantum_queries";
    if (with_timing) out << ",wall_time";
    out << '\n';
    const std::string command(to_string(cfg.command));
    const std::string regime = cfg.regime_name();
    for (const auto& r : res.reports) {
        out << kCsvSchemaVersion << ',' << command << ',' << regime << ',' << r.instance << ',' << r.trial_index
            << ',' << to_string(r.decision) << ',' << to_string(r.reason) << ','
            << (r.mu_hat ? format_real(*r.mu_hat) : "") << ',' << r.code_uses << ',' << r.budget << ','
            << (r.max_count ? std::to_string(*r.max_count) : "") << ','
            << (r.modeled_quantum_queries ? std::to_string(*r.modeled_quantum_queries) : "");
        if (with_timing) out << ',' << format_real(r.wall_time);
        out << '\n';
    }
}

inline void write_summary(std::ostream& out, const ExperimentResult& res) {
    for (const auto& s : res.summaries) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-28s trials=%llu accept_rate=%.4f wilson95=[%.4f, %.4f] mean_code_uses=%.1f\n",
                      s.instance.c_str(), static_cast<unsigned long long>(s.trials), s.accept_rate, s.interval.lo,
                      s.interval.hi, s.mean_code_uses);
        out << buf;
    }
}

namespace svg {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace svg

/// Accept rate per instance with Wilson intervals, as a dot-and-whisker chart.
inline void write_rate_svg(std::ostream& out, const ExperimentResult& res, const std::string& title) {
    const double width = 640, row_h = 28, left = 220, right = 40, top = 48;
    const double height = top + row_h * static_cast<double>(res.summaries.size()) + 40;
    const double plot_w = width - left - right;
    auto x_of = [&](double rate) { return left + rate * plot_w; };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << svg::num(height)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << svg::escape(title) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double x = x_of(t / 4.0);
        out << "<line x1=\"" << svg::num(x) << "\" y1=\"" << top - 8 << "\" x2=\"" << svg::num(x) << "\" y2=\""
            << svg::num(height - 32) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << svg::num(x) << "\" y=\"" << svg::num(height - 16) << "\" text-anchor=\"middle\">"
            << svg::num(t / 4.0) << "</text>\n";
    }
    for (std::size_t i = 0; i < res.summaries.size(); ++i) {
        const auto& s = res.summaries[i];
        const double y = top + row_h * (static_cast<double>(i) + 0.5);
        out << "<text x=\"" << left - 8 << "\" y=\"" << svg::num(y + 4) << "\" text-anchor=\"end\">"
            << svg::escape(s.instance) << "</text>\n";
        out << "<line x1=\"" << svg::num(x_of(s.interval.lo)) << "\" y1=\"" << svg::num(y) << "\" x2=\""
            << svg::num(x_of(s.interval.hi)) << "\" y2=\"" << svg::num(y) << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
        out << "<circle cx=\"" << svg::num(x_of(s.accept_rate)) << "\" cy=\"" << svg::num(y)
            << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace distcheck
