#include "gazekit/report.hpp"

#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

namespace gazekit {

using nlohmann::json;

ModelScores score_model(const std::string& model, const std::vector<BenchmarkScore>& per_benchmark) {
    ModelScores m{model, per_benchmark, std::nullopt};
    std::vector<BenchmarkScore> paired;
    for (const auto& s : per_benchmark)
        if (s.view == View::Paired) paired.push_back(s);
    if (!paired.empty()) m.mean = mean_across_benchmarks(paired);
    return m;
}

std::string format1(std::optional<double> value, Rounding mode) {
    if (!value) return "-";
    char buf[32];
    double r = round1(*value, mode);
    if (r == 0.0) r = 0.0; // no "-0.0"
    std::snprintf(buf, sizeof buf, "%.1f", r);
    return buf;
}

json to_json(const ConfusionMatrix& cm) { return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}}; }

json to_json(const Dissection& d) {
    return {{"wrong_real", d.wrong_real}, {"right_fake", d.right_fake}, {"right_real", d.right_real},
            {"wrong_fake", d.wrong_fake}};
}

json to_json(const BenchmarkScore& s, Rounding mode) {
    auto metric = [&](std::optional<double> v) -> json {
        if (!v) return nullptr;
        return {{"value", *v}, {"display", format1(v, mode)}};
    };
    const auto eff = effective_count(s.n0, s.n_eff);
    return {{"benchmark", s.benchmark},
            {"view", to_string(s.view)},
            {"ba", metric(s.ba)},
            {"macro_f1", metric(s.macro_f1)},
            {"mcc", metric(s.mcc)},
            {"n0", s.n0},
            {"n_eff", s.n_eff},
            {"failure_rate", eff.failure_rate},
            {"confusion", to_json(s.cm)},
            {"dissection", to_json(dissect(s.cm))}};
}

json score_records(const std::vector<ModelScores>& models, Rounding mode) {
    json out = json::array();
    for (const auto& m : models) {
        for (const auto& s : m.benchmarks) {
            json j = to_json(s, mode);
            j["model"] = m.model;
            out.push_back(std::move(j));
        }
        if (m.mean) {
            json j = to_json(*m.mean, mode);
            j["model"] = m.model;
            j.erase("confusion");
            j.erase("dissection");
            out.push_back(std::move(j));
        }
    }
    return out;
}

std::string render_score_table(const std::vector<ModelScores>& models, Rounding mode) {
    std::vector<std::string> benchmarks;
    std::set<std::string> seen;
    for (const auto& m : models)
        for (const auto& s : m.benchmarks)
            if (seen.insert(s.benchmark).second) benchmarks.push_back(s.benchmark);

    std::size_t name_w = 5;
    for (const auto& m : models) name_w = std::max(name_w, m.model.size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w)) << "model";
    for (const auto& b : benchmarks) os << " | " << std::setw(20) << b;
    os << " | mean\n";
    os << std::setw(static_cast<int>(name_w)) << "";
    for (std::size_t i = 0; i <= benchmarks.size(); ++i) os << " | " << std::setw(20) << "BA     F1     MCC";
    os << "\n" << std::string(name_w + 23 * (benchmarks.size() + 1), '-') << "\n";

    auto cell = [&](const BenchmarkScore* s) {
        std::ostringstream c;
        c << std::right << std::setw(6) << (s ? format1(s->ba, mode) : "-") << " " << std::setw(6)
          << (s ? format1(s->macro_f1, mode) : "-") << " " << std::setw(6) << (s ? format1(s->mcc, mode) : "-");
        return c.str();
    };

    for (const auto& m : models) {
        os << std::left << std::setw(static_cast<int>(name_w)) << m.model;
        for (const auto& b : benchmarks) {
            const BenchmarkScore* found = nullptr;
            for (const auto& s : m.benchmarks)
                if (s.benchmark == b) found = &s;
            std::string c = cell(found);
            if (found && found->view == View::FakeOnly) c += "*";
            os << " | " << std::setw(20) << c;
        }
        os << " | " << cell(m.mean ? &*m.mean : nullptr) << "\n";
    }
    os << "(* fake-only view: BA column is fake-class accuracy)\n";
    return os.str();
}

std::string render_dissection(const std::string& benchmark,
                              const std::vector<std::pair<std::string, ConfusionMatrix>>& models,
                              const std::string& base) {
    std::ostringstream os;
    os << "Confusion dissection on " << benchmark << "\n";
    const ConfusionMatrix* base_cm = nullptr;
    for (const auto& [name, cm] : models)
        if (name == base) base_cm = &cm;

    os << std::left << std::setw(12) << "" ;
    for (const auto& [name, cm] : models) os << std::right << std::setw(14) << name;
    if (base_cm) os << std::setw(14) << "delta";
    os << "\n";

    const char* rows[] = {"wrong_real", "right_fake", "right_real", "wrong_fake"};
    for (int i = 0; i < 4; ++i) {
        os << std::left << std::setw(12) << rows[i];
        auto pick = [i](const Dissection& d) {
            switch (i) {
            case 0: return d.wrong_real;
            case 1: return d.right_fake;
            case 2: return d.right_real;
            default: return d.wrong_fake;
            }
        };
        for (const auto& [name, cm] : models) os << std::right << std::setw(14) << pick(dissect(cm));
        if (base_cm) {
            // Delta of the last non-base model against the base.
            const ConfusionMatrix* other = nullptr;
            for (const auto& [name, cm] : models)
                if (name != base) other = &cm;
            if (other) {
                const auto d = pick(dissect(*other) - dissect(*base_cm));
                os << std::setw(14) << ((d > 0 ? "+" : "") + std::to_string(d));
            }
        }
        os << "\n";
    }
    return os.str();
}

std::string render_card_table(const std::vector<CardStats>& stats) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "card" << std::right << std::setw(12) << "invocations" << std::setw(10) << "rate"
       << std::setw(10) << "a_k" << "\n";
    for (const auto& s : stats) {
        os << std::left << std::setw(28) << s.card << std::right << std::setw(12) << s.invocations << std::setw(10)
           << std::fixed << std::setprecision(4) << s.invocation_rate << std::setw(10);
        if (s.accuracy)
            os << *s.accuracy;
        else
            os << "-";
        os << "\n";
    }
    return os.str();
}

std::string render_wrong_pool(const WrongPoolReport& report) {
    std::ostringstream os;
    auto block = [&](const char* title, const ErrorPool& p) {
        os << title << " (n=" << p.size << ")\n";
        for (const auto& b : p.buckets)
            os << "  " << std::left << std::setw(28) << b.subtype << std::right << std::setw(6) << b.count << std::setw(8)
               << format1(b.percent, Rounding::HalfUp) << "%\n";
    };
    block("wrong_real", report.wrong_real);
    block("wrong_fake", report.wrong_fake);
    return os.str();
}

std::string render_keyword_table(const KeywordStats& stats) {
    std::ostringstream os;
    os << "keyword family frequency (n=" << stats.n << ")\n";
    for (const auto& [name, f] : stats.frequency)
        os << "  " << std::left << std::setw(32) << name << std::right << std::setw(8)
           << format1(100.0 * f, Rounding::HalfUp) << "%\n";
    for (const auto& [pair, f] : stats.co_occurrence)
        os << "  " << std::left << std::setw(32) << (pair.first + " + " + pair.second) << std::right << std::setw(8)
           << format1(100.0 * f, Rounding::HalfUp) << "%\n";
    return os.str();
}

} // namespace gazekit
