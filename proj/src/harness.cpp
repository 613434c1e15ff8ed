#include "smdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "smdp/model_io.hpp"

namespace smdp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kAggregateHeader =
    "d,m,seed_count,Tn,regret_opt_mean,regret_opt_se,regret_prim_mean,regret_prim_se,ratio,tn_over_n";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const double k = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (k - 1.0) / k)};
}

ParamMap grid_params(std::size_t d, std::size_t m, bool with_m) {
    ParamMap p{{"d", std::to_string(d)}};
    if (with_m) p["m"] = std::to_string(m);
    return p;
}

std::vector<double> split_doubles(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') throw ValidationError("malformed number in aggregate CSV: " + cell);
        out.push_back(v);
    }
    return out;
}

} // namespace

void check_plan(const ExperimentPlan& p) {
    if (p.d.empty() || p.m.empty()) throw ValidationError("plan needs at least one d and one m");
    if (p.seeds.empty()) throw ValidationError("plan needs at least one seed");
    if (p.steps == 0 && !(p.time_budget > 0.0)) throw ValidationError("plan budget must be positive");
    if (p.checkpoints < 1) throw ValidationError("plan needs at least one checkpoint");
    if (!(p.first_checkpoint > 0.0)) throw ValidationError("first checkpoint must be positive");
    if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(p.radius_scale >= 0.0)) throw ValidationError("radius_scale must be non-negative");
    if (p.option_env != "grid-options" && p.option_env != "grid-det-options")
        throw ValidationError("plan option arm must be grid-options or grid-det-options, not " + p.option_env);
    if (p.primitive_env != "grid") throw ValidationError("plan primitive arm must be grid, not " + p.primitive_env);
    for (std::size_t d : p.d)
        for (std::size_t m : p.m)
            if (m < 1 || m >= d) throw ValidationError("plan has m=" + std::to_string(m) + " outside [1, d) for d=" +
                                                       std::to_string(d));
}

ExperimentPlan parse_plan(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("plan is not valid JSON: ") + e.what());
    }
    ExperimentPlan p;
    try {
        if (j.value("format", std::string("smdp-plan")) != "smdp-plan") throw ValidationError("not a plan file");
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "format" || k == "version") continue;
            else if (k == "d") p.d = v.get<std::vector<std::size_t>>();
            else if (k == "m") p.m = v.get<std::vector<std::size_t>>();
            else if (k == "seeds") p.seeds = v.get<std::vector<std::uint64_t>>();
            else if (k == "time_budget") p.time_budget = v.get<double>();
            else if (k == "steps") p.steps = v.get<std::uint64_t>();
            else if (k == "checkpoints") p.checkpoints = v.get<std::size_t>();
            else if (k == "first_checkpoint") p.first_checkpoint = v.get<double>();
            else if (k == "delta") p.delta = v.get<double>();
            else if (k == "radius_scale") p.radius_scale = v.get<double>();
            else if (k == "option_env") p.option_env = v.get<std::string>();
            else if (k == "primitive_env") p.primitive_env = v.get<std::string>();
            else if (k == "mode") {
                std::string mode = v.get<std::string>();
                if (mode == "bounded") p.mode = ConfidenceMode::Bounded;
                else if (mode == "sub-exp") p.mode = ConfidenceMode::SubExponential;
                else throw ValidationError("mode must be bounded or sub-exp");
            } else {
                throw ValidationError("unknown plan field " + k);
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed plan: ") + e.what());
    }
    check_plan(p);
    return p;
}

std::string dump_plan(const ExperimentPlan& p) {
    json j;
    j["format"] = "smdp-plan";
    j["version"] = 1;
    j["d"] = p.d;
    j["m"] = p.m;
    j["seeds"] = p.seeds;
    j["time_budget"] = p.time_budget;
    j["steps"] = p.steps;
    j["checkpoints"] = p.checkpoints;
    j["first_checkpoint"] = p.first_checkpoint;
    j["delta"] = p.delta;
    j["mode"] = p.mode == ConfidenceMode::Bounded ? "bounded" : "sub-exp";
    j["radius_scale"] = p.radius_scale;
    j["option_env"] = p.option_env;
    j["primitive_env"] = p.primitive_env;
    return j.dump(2) + "\n";
}

ExperimentPlan read_plan_file(const std::string& path) { return parse_plan(read_text_file(path)); }

std::vector<double> plan_checkpoints(const ExperimentPlan& p) {
    // every arm has elapsed at least n when it stopped after n decisions
    const double last = p.steps ? static_cast<double>(p.steps) : p.time_budget;
    const double first = std::min(p.first_checkpoint, last);
    std::vector<double> t;
    if (p.checkpoints == 1 || first == last) return {last};
    const double r = std::log(last / first) / static_cast<double>(p.checkpoints - 1);
    for (std::size_t k = 0; k < p.checkpoints; ++k) t.push_back(k + 1 == p.checkpoints ? last : first * std::exp(r * k));
    return t;
}

double theoretical_ratio(std::size_t d, std::size_t m, double n_over_tn) {
    if (d < 2 || m < 1) throw ValidationError("theoretical ratio needs d >= 2 and m >= 1");
    if (!(n_over_tn > 0.0)) throw ValidationError("n / T_n must be positive");
    const double dd = static_cast<double>(d), mm = static_cast<double>(m);
    return ((2.0 * dd - 2.0 + mm * mm + mm) * dd + mm) / ((2.0 * dd - 2.0) * dd) * std::sqrt(n_over_tn);
}

RegretLedger run_arm(const EnvironmentBundle& env, const ExperimentPlan& plan, std::uint64_t seed) {
    AgentConfig cfg = env.agent_config(plan.mode, plan.delta);
    cfg.confidence.radius_scale = plan.radius_scale;
    std::vector<std::size_t> na(env.model->num_states());
    for (StateId s = 0; s < na.size(); ++s) na[s] = env.model->num_actions(s);
    UcrlSmdpAgent agent(na, cfg);
    auto sim = env.simulator();
    RegretLedger ledger(plan_checkpoints(plan));
    ledger.set_reference_gain(env.reference_gain);
    Rng rng(seed);
    UcrlSmdpAgent::RunLimits lim;
    if (plan.steps) lim.max_steps = plan.steps;
    else lim.time_budget = plan.time_budget;
    agent.run(*sim, 0, rng, ledger, lim);
    return ledger;
}

void aggregate_cell(std::size_t d, std::size_t m, const std::vector<RegretLedger>& opt,
                    const std::vector<RegretLedger>& prim, const std::vector<double>& times, AggregateResult& out) {
    if (opt.empty() || opt.size() != prim.size()) throw ValidationError("aggregation needs one ledger per seed and arm");
    for (double T : times) {
        std::vector<double> ro, rp, dur;
        for (std::size_t k = 0; k < opt.size(); ++k) {
            ro.push_back(opt[k].regret_at_time(T));
            rp.push_back(prim[k].regret_at_time(T));
            double n = opt[k].steps_at_time(T);
            dur.push_back(n > 0.0 ? T / n : std::numeric_limits<double>::quiet_NaN());
        }
        AggregateRow row;
        row.d = d;
        row.m = m;
        row.seed_count = opt.size();
        row.Tn = T;
        std::tie(row.regret_opt_mean, row.regret_opt_se) = mean_se(ro);
        std::tie(row.regret_prim_mean, row.regret_prim_se) = mean_se(rp);
        row.tn_over_n = mean_se(dur).first;
        if (std::isfinite(row.regret_prim_mean) && std::abs(row.regret_prim_mean) > 1e-9 * std::max(1.0, T)) {
            row.ratio = row.regret_opt_mean / row.regret_prim_mean;
        } else {
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            out.warnings.push_back({d, m, T, "primitive regret is zero; ratio undefined"});
        }
        out.rows.push_back(row);
    }
    const AggregateRow& last = out.rows.back();
    TheoryRow th;
    th.d = d;
    th.m = m;
    th.tn_over_n = last.tn_over_n;
    th.theoretical_ratio = std::isfinite(last.tn_over_n) && last.tn_over_n > 0.0
                               ? theoretical_ratio(d, m, 1.0 / last.tn_over_n)
                               : std::numeric_limits<double>::quiet_NaN();
    out.theory.push_back(th);
}

std::string ledger_name(std::size_t d, std::size_t m, std::uint64_t seed) {
    return "d" + std::to_string(d) + "_m" + std::to_string(m) + "_seed" + std::to_string(seed) + ".csv";
}

std::string primitive_ledger_name(std::size_t d, std::uint64_t seed) {
    return "d" + std::to_string(d) + "_primitive_seed" + std::to_string(seed) + ".csv";
}

AggregateResult aggregate_directory(const ExperimentPlan& plan, const std::string& dir) {
    check_plan(plan);
    const fs::path led = fs::path(dir) / "ledgers";
    const auto times = plan_checkpoints(plan);
    AggregateResult res;
    for (std::size_t d : plan.d) {
        std::vector<RegretLedger> prim;
        for (auto seed : plan.seeds) prim.push_back(RegretLedger::read_csv((led / primitive_ledger_name(d, seed)).string()));
        for (std::size_t m : plan.m) {
            std::vector<RegretLedger> opt;
            for (auto seed : plan.seeds) opt.push_back(RegretLedger::read_csv((led / ledger_name(d, m, seed)).string()));
            aggregate_cell(d, m, opt, prim, times, res);
        }
    }
    return res;
}

AggregateResult run_plan(const ExperimentPlan& plan, const std::string& dir, std::size_t jobs,
                         const Progress& progress) {
    check_plan(plan);
    const fs::path led = fs::path(dir) / "ledgers";
    std::error_code ec;
    fs::create_directories(led, ec);
    if (ec) throw ValidationError("cannot create " + led.string() + ": " + ec.message());
    write_text_file((fs::path(dir) / "plan.json").string(), dump_plan(plan));

    // environments are built once and shared read-only by the workers
    std::map<std::pair<std::size_t, std::size_t>, EnvironmentBundle> envs;
    struct Job {
        std::size_t d, m;
        bool primitive;
        std::uint64_t seed;
    };
    std::vector<Job> queue;
    for (std::size_t d : plan.d) {
        envs.emplace(std::make_pair(d, std::size_t{0}), make_environment(plan.primitive_env, grid_params(d, 0, false)));
        for (auto seed : plan.seeds) queue.push_back({d, 0, true, seed});
        for (std::size_t m : plan.m) {
            envs.emplace(std::make_pair(d, m), make_environment(plan.option_env, grid_params(d, m, true)));
            for (auto seed : plan.seeds) queue.push_back({d, m, false, seed});
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    std::string failure_where;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= queue.size()) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (failure) return;
            }
            const Job& job = queue[i];
            const std::string where = "d=" + std::to_string(job.d) +
                                      (job.primitive ? " primitive" : " m=" + std::to_string(job.m)) +
                                      " seed=" + std::to_string(job.seed);
            try {
                RegretLedger l = run_arm(envs.at({job.d, job.m}), plan, job.seed);
                const std::string name = job.primitive ? primitive_ledger_name(job.d, job.seed)
                                                       : ledger_name(job.d, job.m, job.seed);
                l.write_csv((led / name).string());
                if (progress) {
                    std::lock_guard<std::mutex> lock(mu);
                    progress(where + " done, regret " + fmt17(l.regret()));
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) {
                    failure = std::current_exception();
                    failure_where = where;
                }
                return;
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, queue.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const ValidationError& e) {
            throw ValidationError("run " + failure_where + ": " + e.what());
        } catch (const std::exception& e) {
            throw RunAbort("run " + failure_where + ": " + e.what());
        }
    }

    AggregateResult res = aggregate_directory(plan, dir);
    emit_csv(res, dir);
    return res;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << kAggregateHeader << '\n';
    for (const auto& r : rows)
        os << r.d << ',' << r.m << ',' << r.seed_count << ',' << fmt17(r.Tn) << ',' << fmt17(r.regret_opt_mean) << ','
           << fmt17(r.regret_opt_se) << ',' << fmt17(r.regret_prim_mean) << ',' << fmt17(r.regret_prim_se) << ','
           << fmt17(r.ratio) << ',' << fmt17(r.tn_over_n) << '\n';
    return os.str();
}

std::vector<AggregateRow> parse_aggregate_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kAggregateHeader) throw ValidationError("unexpected aggregate CSV header");
    std::vector<AggregateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto v = split_doubles(line);
        if (v.size() != 10) throw ValidationError("aggregate row has " + std::to_string(v.size()) + " columns");
        AggregateRow r;
        r.d = static_cast<std::size_t>(v[0]);
        r.m = static_cast<std::size_t>(v[1]);
        r.seed_count = static_cast<std::size_t>(v[2]);
        r.Tn = v[3];
        r.regret_opt_mean = v[4];
        r.regret_opt_se = v[5];
        r.regret_prim_mean = v[6];
        r.regret_prim_se = v[7];
        r.ratio = v[8];
        r.tn_over_n = v[9];
        rows.push_back(r);
    }
    return rows;
}

void emit_csv(const AggregateResult& r, const std::string& dir) {
    const fs::path base(dir);
    write_text_file((base / "aggregate.csv").string(), aggregate_csv(r.rows));
    std::ostringstream w;
    w << "d,m,Tn,message\n";
    for (const auto& x : r.warnings) w << x.d << ',' << x.m << ',' << fmt17(x.Tn) << ',' << x.message << '\n';
    write_text_file((base / "warnings.csv").string(), w.str());
    std::ostringstream t;
    t << "d,m,tn_over_n,theoretical_ratio\n";
    for (const auto& x : r.theory)
        t << x.d << ',' << x.m << ',' << fmt17(x.tn_over_n) << ',' << fmt17(x.theoretical_ratio) << '\n';
    write_text_file((base / "theory.csv").string(), t.str());
}

} // namespace smdp
