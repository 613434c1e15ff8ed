#include "smdp/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace smdp {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json dist_to_json(const DistributionSpec& d, const std::map<const PhaseTypeChain*, std::size_t>& chains) {
    json j;
    if (auto x = std::get_if<Dirac>(&d)) {
        j["dirac"] = x->value;
    } else if (auto x = std::get_if<TwoPoint>(&d)) {
        j["two_point"] = {x->low, x->high, x->p_high};
    } else if (auto x = std::get_if<DiscreteTable>(&d)) {
        j["discrete"] = {{"values", x->values}, {"masses", x->masses}};
    } else {
        const auto& p = std::get<PhaseType>(d);
        j["phase_type"] = {{"chain", chains.at(p.chain.get())},
                           {"end", p.end},
                           {"quantity", p.quantity == PhaseQuantity::Holding ? "holding" : "reward"}};
    }
    return j;
}

json prim_to_json(const PrimitiveDist& d) {
    return std::visit([](const auto& x) { return dist_to_json(DistributionSpec{x}, {}); }, d);
}

PrimitiveDist prim_from_json(const json& j) {
    if (j.contains("dirac")) return Dirac{j.at("dirac").get<double>()};
    if (j.contains("two_point")) {
        const auto& a = j.at("two_point");
        if (!a.is_array() || a.size() != 3) throw ValidationError("two_point needs [low, high, p_high]");
        return TwoPoint{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
    }
    if (j.contains("discrete")) {
        const auto& t = j.at("discrete");
        return DiscreteTable{t.at("values").get<std::vector<double>>(), t.at("masses").get<std::vector<double>>()};
    }
    throw ValidationError("unknown distribution: " + j.dump());
}

DistributionSpec dist_from_json(const json& j, const std::vector<std::shared_ptr<const PhaseTypeChain>>& chains) {
    if (j.contains("phase_type")) {
        const auto& p = j.at("phase_type");
        std::size_t c = p.at("chain").get<std::size_t>();
        if (c >= chains.size()) throw ValidationError("phase_type refers to a missing chain");
        std::string q = p.at("quantity").get<std::string>();
        if (q != "holding" && q != "reward") throw ValidationError("phase_type quantity must be holding or reward");
        return PhaseType{chains[c], p.at("end").get<std::size_t>(),
                         q == "holding" ? PhaseQuantity::Holding : PhaseQuantity::Reward};
    }
    return std::visit([](const auto& x) -> DistributionSpec { return x; }, prim_from_json(j));
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed file: ") + e.what());
    }
}

void check_format(const json& j, const char* expected) {
    if (!j.is_object() || j.value("format", std::string()) != expected)
        throw ValidationError(std::string("expected a file with format \"") + expected + "\"");
    if (j.value("version", 0) != kVersion) throw ValidationError("unsupported format version");
}

} // namespace

std::string dump_model(const SmdpModel& m) {
    std::map<const PhaseTypeChain*, std::size_t> index;
    json chains = json::array();
    auto note_chain = [&](const DistributionSpec& d) {
        auto p = std::get_if<PhaseType>(&d);
        if (!p || index.count(p->chain.get())) return;
        index[p->chain.get()] = chains.size();
        const auto& ch = *p->chain;
        json arcs = json::array();
        for (const auto& a : ch.arcs()) {
            json ja = {{"from", a.from}, {"p", a.prob}, {"reward", prim_to_json(a.reward)}};
            if (a.to_transient >= 0) ja["to"] = a.to_transient;
            else ja["end"] = a.to_end;
            arcs.push_back(ja);
        }
        chains.push_back({{"transient", ch.transient_states()}, {"ends", ch.end_states()}, {"arcs", arcs}});
    };
    json states = json::array();
    for (StateId s = 0; s < m.num_states(); ++s) {
        json acts = json::array();
        for (const auto& e : m.actions()[s]) {
            json outs = json::array();
            for (const auto& o : e.outcomes) {
                note_chain(o.reward);
                note_chain(o.holding);
                outs.push_back({{"next", o.next},
                                {"p", o.prob},
                                {"reward", dist_to_json(o.reward, index)},
                                {"holding", dist_to_json(o.holding, index)}});
            }
            json ja = {{"outcomes", outs}};
            if (!e.label.empty()) ja["label"] = e.label;
            if (e.reward_rate) ja["reward_rate"] = *e.reward_rate;
            acts.push_back(ja);
        }
        states.push_back({{"actions", acts}});
    }
    json j;
    j["format"] = "smdp-model";
    j["version"] = kVersion;
    j["bounds"] = {{"r_max", m.bounds().r_max}, {"tau_min", m.bounds().tau_min}, {"tau_max", m.bounds().tau_max}};
    if (auto t = std::get_if<SubExpTail>(&m.tail()))
        j["tail"] = {{"kind", "sub_exp"}, {"sigma_r", t->sigma_r}, {"b_r", t->b_r}, {"sigma_tau", t->sigma_tau}, {"b_tau", t->b_tau}};
    else if (auto t = std::get_if<BoundedTail>(&m.tail()))
        j["tail"] = {{"kind", "bounded"}, {"t_min", t->t_min}, {"t_max", t->t_max}};
    if (!chains.empty()) j["chains"] = chains;
    j["states"] = states;
    return j.dump(1) + "\n";
}

SmdpModel parse_model(const std::string& text) {
    json j = parse_json(text);
    check_format(j, "smdp-model");
    try {
        std::vector<std::shared_ptr<const PhaseTypeChain>> chains;
        for (const auto& c : j.value("chains", json::array())) {
            std::vector<PhaseTypeChain::Arc> arcs;
            for (const auto& a : c.at("arcs")) {
                PhaseTypeChain::Arc arc;
                arc.from = a.at("from").get<int>();
                arc.to_transient = a.contains("to") ? a.at("to").get<int>() : -1;
                arc.to_end = a.contains("end") ? a.at("end").get<int>() : -1;
                arc.prob = a.at("p").get<double>();
                arc.reward = prim_from_json(a.at("reward"));
                arcs.push_back(arc);
            }
            try {
                chains.push_back(std::make_shared<const PhaseTypeChain>(c.at("transient").get<std::vector<StateId>>(),
                                                                        c.at("ends").get<std::vector<StateId>>(),
                                                                        std::move(arcs)));
            } catch (const std::invalid_argument& e) {
                throw ValidationError(std::string("bad chain: ") + e.what());
            }
        }
        std::vector<std::vector<ActionEntry>> actions;
        for (const auto& js : j.at("states")) {
            std::vector<ActionEntry> row;
            for (const auto& ja : js.at("actions")) {
                ActionEntry e;
                e.label = ja.value("label", std::string());
                if (ja.contains("reward_rate")) e.reward_rate = ja.at("reward_rate").get<double>();
                for (const auto& jo : ja.at("outcomes")) {
                    Outcome o;
                    o.next = jo.at("next").get<StateId>();
                    o.prob = jo.at("p").get<double>();
                    o.reward = dist_from_json(jo.at("reward"), chains);
                    o.holding = dist_from_json(jo.at("holding"), chains);
                    e.outcomes.push_back(std::move(o));
                }
                row.push_back(std::move(e));
            }
            actions.push_back(std::move(row));
        }
        std::optional<ModelBounds> bounds;
        if (j.contains("bounds")) {
            const auto& b = j.at("bounds");
            bounds = ModelBounds{b.at("r_max").get<double>(), b.at("tau_min").get<double>(), b.at("tau_max").get<double>()};
        }
        SmdpModel m(std::move(actions), bounds);
        if (j.contains("tail")) {
            const auto& t = j.at("tail");
            std::string kind = t.at("kind").get<std::string>();
            if (kind == "sub_exp")
                m.set_tail(SubExpTail{t.at("sigma_r").get<double>(), t.at("b_r").get<double>(),
                                      t.at("sigma_tau").get<double>(), t.at("b_tau").get<double>()});
            else if (kind == "bounded")
                m.set_tail(BoundedTail{t.at("t_min").get<double>(), t.at("t_max").get<double>()});
            else
                throw ValidationError("unknown tail kind " + kind);
        }
        require_valid(m);
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
}

std::string dump_options(const OptionSet& set) {
    json opts = json::array();
    for (const auto& o : set.options) {
        json term = json::array(), pol = json::array();
        for (StateId s = 0; s < o.termination.size(); ++s)
            if (o.termination[s] != 0.0) term.push_back({s, o.termination[s]});
        for (StateId s = 0; s < o.policy.size(); ++s)
            if (o.policy[s] != kNoAction) pol.push_back({s, o.policy[s]});
        json jo = {{"initiation", o.initiation}, {"termination", term}, {"policy", pol}};
        if (!o.label.empty()) jo["label"] = o.label;
        opts.push_back(jo);
    }
    json j = {{"format", "smdp-options"}, {"version", kVersion}, {"num_states", set.num_base_states}, {"options", opts}};
    return j.dump(1) + "\n";
}

OptionSet parse_options(const std::string& text) {
    json j = parse_json(text);
    check_format(j, "smdp-options");
    try {
        OptionSet set;
        set.num_base_states = j.at("num_states").get<std::size_t>();
        const std::size_t n = set.num_base_states;
        for (const auto& jo : j.at("options")) {
            OptionSpec o;
            o.label = jo.value("label", std::string());
            o.initiation = jo.at("initiation").get<std::vector<StateId>>();
            o.termination.assign(n, 0.0);
            o.policy.assign(n, kNoAction);
            for (const auto& t : jo.at("termination")) {
                StateId s = t.at(0).get<StateId>();
                if (s >= n) throw ValidationError("termination state out of range");
                o.termination[s] = t.at(1).get<double>();
            }
            for (const auto& p : jo.at("policy")) {
                StateId s = p.at(0).get<StateId>();
                if (s >= n) throw ValidationError("policy state out of range");
                o.policy[s] = p.at(1).get<std::size_t>();
            }
            for (StateId s : o.initiation)
                if (s >= n) throw ValidationError("initiation state out of range");
            set.options.push_back(std::move(o));
        }
        return set;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed option set: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

SmdpModel read_model_file(const std::string& path) { return parse_model(read_text_file(path)); }
void write_model_file(const std::string& path, const SmdpModel& m) { write_text_file(path, dump_model(m)); }
OptionSet read_options_file(const std::string& path) { return parse_options(read_text_file(path)); }
void write_options_file(const std::string& path, const OptionSet& set) { write_text_file(path, dump_options(set)); }

} // namespace smdp
