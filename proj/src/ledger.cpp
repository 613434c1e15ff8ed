#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smdp/learning.hpp"

namespace smdp {

namespace {

constexpr const char* kHeader = "i,s,a,tau,r,Tn,cum_reward,regret";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

RegretLedger::RegretLedger(std::vector<double> checkpoints) : full_(false), checkpoints_(std::move(checkpoints)) {
    if (!std::is_sorted(checkpoints_.begin(), checkpoints_.end()))
        throw ValidationError("ledger checkpoints must be increasing");
}

void RegretLedger::append(StateId s, std::size_t a, double tau, double r) {
    ++steps_;
    time_ += tau;
    reward_ += r;
    Row row{steps_, s, a, tau, r, time_, reward_};
    if (full_) {
        kept_.push_back(row);
        last_ = row;
        last_kept_ = true;
        return;
    }
    bool keep = false;
    while (next_cp_ < checkpoints_.size() && row.Tn >= checkpoints_[next_cp_]) {
        keep = true;
        ++next_cp_;
    }
    if (keep) {
        if (!last_kept_ && steps_ > 1) kept_.push_back(last_);
        kept_.push_back(row);
    }
    last_ = row;
    last_kept_ = keep;
}

std::vector<RegretLedger::Row> RegretLedger::rows() const {
    std::vector<Row> out = kept_;
    if (steps_ > 0 && !last_kept_) out.push_back(last_);
    return out;
}

namespace {

template <class F>
double interpolate(const std::vector<RegretLedger::Row>& rows, double T, F value) {
    RegretLedger::Row origin;
    const RegretLedger::Row* prev = &origin;
    for (const auto& r : rows) {
        if (r.Tn >= T) {
            double span = r.Tn - prev->Tn;
            double w = span > 0.0 ? (T - prev->Tn) / span : 1.0;
            return value(*prev) + w * (value(r) - value(*prev));
        }
        prev = &r;
    }
    return value(*prev);
}

} // namespace

double RegretLedger::regret_at_time(double T) const {
    const double rho = rho_;
    return interpolate(rows(), T, [rho](const Row& r) { return r.Tn * rho - r.cum_reward; });
}

double RegretLedger::steps_at_time(double T) const {
    return interpolate(rows(), T, [](const Row& r) { return static_cast<double>(r.i); });
}

std::string RegretLedger::csv() const {
    std::ostringstream os;
    os << kHeader << '\n';
    for (const auto& r : rows())
        os << r.i << ',' << r.s << ',' << r.a << ',' << fmt17(r.tau) << ',' << fmt17(r.r) << ',' << fmt17(r.Tn) << ','
           << fmt17(r.cum_reward) << ',' << fmt17(r.Tn * rho_ - r.cum_reward) << '\n';
    return os.str();
}

void RegretLedger::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << csv();
}

RegretLedger RegretLedger::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw ValidationError("unexpected ledger header in " + path);
    RegretLedger led;
    double regret = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row r;
        unsigned long long i = 0, s = 0, a = 0;
        if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%lf,%lf,%lf,%lf,%lf", &i, &s, &a, &r.tau, &r.r, &r.Tn,
                        &r.cum_reward, &regret) != 8)
            throw ValidationError("malformed ledger row: " + line);
        r.i = i;
        r.s = s;
        r.a = a;
        led.kept_.push_back(r);
    }
    if (!led.kept_.empty()) {
        led.last_ = led.kept_.back();
        led.steps_ = led.last_.i;
        led.time_ = led.last_.Tn;
        led.reward_ = led.last_.cum_reward;
        if (led.time_ > 0.0) led.rho_ = (regret + led.reward_) / led.time_;
    }
    return led;
}

} // namespace smdp
