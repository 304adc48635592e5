#include "bpsim/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "bpsim/errors.hpp"

namespace bpsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ScenarioError(origin + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& origin) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(origin, std::string("missing field '") + key + "'");
    return *it;
}

// Accepts 0.7, 2, or "7/10".
double number_in(const json& v, const std::string& origin) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const auto slash = s.find('/');
        double num = 0.0, den = 1.0;
        try {
            num = std::stod(slash == std::string::npos ? s : s.substr(0, slash));
            if (slash != std::string::npos) den = std::stod(s.substr(slash + 1));
        } catch (const std::exception&) {
            fail(origin, "cannot parse number: " + s);
        }
        if (den == 0) fail(origin, "fraction with zero denominator: " + s);
        return num / den;
    }
    fail(origin, "expected a number");
}

std::vector<double> number_list(const json& v, const std::string& origin) {
    if (!v.is_array()) fail(origin, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(number_in(x, origin));
    return out;
}

AuxObjectiveKind objective_kind(const std::string& s, const std::string& origin) {
    if (s == "linear") return AuxObjectiveKind::Linear;
    if (s == "quadratic_diagonal") return AuxObjectiveKind::QuadraticDiagonal;
    if (s == "log_sum") return AuxObjectiveKind::LogSum;
    fail(origin, "unknown objective kind '" + s + "' (catalog: linear, quadratic_diagonal, log_sum)");
}

const char* objective_name(AuxObjectiveKind k) {
    switch (k) {
        case AuxObjectiveKind::Linear: return "linear";
        case AuxObjectiveKind::QuadraticDiagonal: return "quadratic_diagonal";
        case AuxObjectiveKind::LogSum: return "log_sum";
    }
    return "?";
}

}  // namespace

LoadedScenario parse_scenario(const json& doc, const std::string& origin) {
    if (!doc.is_object()) fail(origin, "top level must be an object");
    LoadedScenario out;
    ScenarioSpec& spec = out.spec;

    spec.name = doc.value("name", "scenario");
    spec.queue_count = field(doc, "queue_count", origin).get<int>();
    spec.delta_max = number_in(field(doc, "delta_max", origin), origin + "/delta_max");

    const json& chain = field(doc, "chain", origin);
    const json& trans = field(chain, "transition", origin + "/chain");
    for (std::size_t i = 0; i < trans.size(); ++i)
        spec.chain.transition.push_back(number_list(trans[i], origin + "/chain/transition"));
    if (chain.contains("labels"))
        for (const auto& l : chain["labels"]) spec.chain.state_labels.push_back(l.get<std::string>());

    if (doc.contains("sink_queues"))
        for (const auto& s : doc["sink_queues"]) spec.sink_queues.push_back(s.get<int>());
    if (doc.contains("factors"))
        for (const auto& f : doc["factors"]) spec.factors.push_back(f.get<int>());

    const json& states = field(doc, "states", origin);
    if (states.size() != spec.chain.transition.size())
        fail(origin, "states array size must match the chain");
    int si = 0;
    for (const auto& st : states) {
        const std::string sctx = origin + "/states[" + std::to_string(si++) + "]";
        const json& actions = field(st, "actions", sctx);
        if (actions.empty()) fail(sctx, "empty action list");
        std::vector<ActionRow> rows;
        std::vector<std::vector<Transfer>> transfers;
        std::vector<std::vector<ExogenousEntry>> exo;
        for (const auto& act : actions) {
            ActionRow row;
            row.cost = number_in(field(act, "cost", sctx), sctx + "/cost");
            row.arrivals = number_list(field(act, "arrivals", sctx), sctx + "/arrivals");
            row.services = number_list(field(act, "services", sctx), sctx + "/services");
            rows.push_back(std::move(row));
            std::vector<Transfer> tr;
            if (act.contains("transfers"))
                for (const auto& t : act["transfers"]) {
                    if (!t.is_array() || t.size() != 3) fail(sctx, "transfer must be [src, dst, count]");
                    tr.push_back({t[0].get<int>(), t[1].get<int>(), number_in(t[2], sctx)});
                }
            transfers.push_back(std::move(tr));
            std::vector<ExogenousEntry> ex;
            if (act.contains("exogenous"))
                for (const auto& e : act["exogenous"]) {
                    if (!e.is_array() || e.size() != 2) fail(sctx, "exogenous must be [queue, count]");
                    ex.push_back({e[0].get<int>(), number_in(e[1], sctx)});
                }
            exo.push_back(std::move(ex));
        }
        spec.actions.push_back(std::move(rows));
        spec.routing.push_back(std::move(transfers));
        spec.exogenous.push_back(std::move(exo));
    }

    if (doc.contains("aux")) {
        const json& a = doc["aux"];
        const std::string actx = origin + "/aux";
        AuxSpec aux;
        aux.attribute_dim = field(a, "attribute_dim", actx).get<int>();
        aux.delta_max = a.contains("delta_max") ? number_in(a["delta_max"], actx) : spec.delta_max;
        const json& obj = field(a, "objective", actx);
        aux.objective.kind = objective_kind(field(obj, "kind", actx).get<std::string>(), actx);
        if (obj.contains("c")) aux.objective.c = number_list(obj["c"], actx + "/c");
        if (obj.contains("center")) aux.objective.center = number_list(obj["center"], actx + "/center");
        if (obj.contains("a")) aux.objective.a = number_list(obj["a"], actx + "/a");
        const json& attr = field(a, "attributes", actx);
        for (const auto& per_state : attr) {
            std::vector<std::vector<double>> sa;
            for (const auto& y : per_state) sa.push_back(number_list(y, actx + "/attributes"));
            aux.attributes.push_back(std::move(sa));
        }
        out.aux = std::move(aux);
    }

    const ValidationReport report = validate(spec);
    if (!report.ok()) throw ValidationError(origin + ": " + report.first_failure());
    if (out.aux) validate_aux(*out.aux, spec);
    return out;
}

LoadedScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open file");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ScenarioError(path + ": " + e.what());
    }
    return parse_scenario(doc, path);
}

json emit_scenario(const ScenarioSpec& spec, const AuxSpec* aux) {
    json doc;
    doc["name"] = spec.name;
    doc["queue_count"] = spec.queue_count;
    doc["delta_max"] = spec.delta_max;
    doc["chain"]["transition"] = spec.chain.transition;
    if (!spec.chain.state_labels.empty()) doc["chain"]["labels"] = spec.chain.state_labels;
    if (!spec.sink_queues.empty()) doc["sink_queues"] = spec.sink_queues;
    if (!spec.factors.empty()) doc["factors"] = spec.factors;

    json states = json::array();
    for (std::size_t s = 0; s < spec.actions.size(); ++s) {
        json actions = json::array();
        for (std::size_t k = 0; k < spec.actions[s].size(); ++k) {
            const auto& row = spec.actions[s][k];
            json act;
            act["cost"] = row.cost;
            act["arrivals"] = row.arrivals;
            act["services"] = row.services;
            if (!spec.routing.empty() && !spec.routing[s][k].empty()) {
                json tr = json::array();
                for (const auto& t : spec.routing[s][k]) tr.push_back({t.src, t.dst, t.count});
                act["transfers"] = tr;
            }
            if (!spec.exogenous.empty() && !spec.exogenous[s][k].empty()) {
                json ex = json::array();
                for (const auto& e : spec.exogenous[s][k]) ex.push_back({e.queue, e.count});
                act["exogenous"] = ex;
            }
            actions.push_back(std::move(act));
        }
        states.push_back(json{{"actions", std::move(actions)}});
    }
    doc["states"] = std::move(states);

    if (aux) {
        json a;
        a["attribute_dim"] = aux->attribute_dim;
        a["delta_max"] = aux->delta_max;
        a["objective"]["kind"] = objective_name(aux->objective.kind);
        if (!aux->objective.c.empty()) a["objective"]["c"] = aux->objective.c;
        if (!aux->objective.center.empty()) a["objective"]["center"] = aux->objective.center;
        if (!aux->objective.a.empty()) a["objective"]["a"] = aux->objective.a;
        a["attributes"] = aux->attributes;
        doc["aux"] = std::move(a);
    }
    return doc;
}

}  // namespace bpsim
