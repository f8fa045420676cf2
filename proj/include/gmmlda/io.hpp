#pragma once

/*
 * File formats. Intent and topic ids are 1-based in every on-disk format;
 * conversion to the 0-based internal representation happens here.
 *
 *   corpus JSONL     {"id": "...", "sentences": [{"tokens": [...], "label": "..."?}]}
 *   vocabulary       {"words": [...]}            array index = token id
 *   stopwords        one word per line, '#' comments
 *   model dump       {"K","T","rho","pi0","intent_word_dist","topic_word_dist",
 *                     "hyper",...} plus "vocab" and "nv" so inspection works
 *                     from the dump alone
 *   assignments JSONL {"id","z","pi","u","b","t"} per document, t entries null
 *                     where b = 0
 *   diagnostics CSV  iteration,joint_log_score,intent_fraction,mean_rho
 *   metrics JSON     per-run rows plus their mean
 *   split JSON       {"labeled_ids": [...]}
 */

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmmlda/corpus.hpp"
#include "gmmlda/eval.hpp"
#include "gmmlda/model.hpp"
#include "gmmlda/sampler.hpp"

namespace gmmlda {

using json = nlohmann::json;

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace detail

// --- corpus --------------------------------------------------------------

inline RawCorpus load_raw_corpus(const std::string& path) {
    std::ifstream in = detail::open_input(path);
    RawCorpus raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": parse error: " + e.what());
        }
        RawDocument doc;
        try {
            doc.id = j.at("id").get<std::string>();
            bool any_label = false, all_label = true;
            for (const auto& js : j.at("sentences")) {
                doc.sentences.push_back(js.at("tokens").get<std::vector<std::string>>());
                if (js.contains("label") && !js["label"].is_null()) {
                    any_label = true;
                    if (!doc.labels) doc.labels.emplace();
                    doc.labels->push_back(js["label"].get<std::string>());
                } else {
                    all_label = false;
                }
            }
            if (any_label && !all_label)
                throw std::runtime_error("label count mismatch (partially labeled document)");
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad document: " + e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        raw.documents.push_back(std::move(doc));
    }
    validate_raw_corpus(raw);
    return raw;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out = detail::open_output(path);
    const RawCorpus raw = corpus_to_raw(corpus);
    for (const auto& doc : raw.documents) {
        json j;
        j["id"] = doc.id;
        j["sentences"] = json::array();
        for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            json js;
            js["tokens"] = doc.sentences[s];
            if (doc.labels) js["label"] = (*doc.labels)[s];
            j["sentences"].push_back(std::move(js));
        }
        out << j.dump() << "\n";
    }
}

inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    json j;
    j["words"] = vocab.words();
    detail::open_output(path) << j.dump() << "\n";
}

inline Vocabulary load_vocabulary(const std::string& path) {
    json j = json::parse(detail::open_input(path));
    Vocabulary vocab;
    for (const auto& w : j.at("words")) vocab.add(w.get<std::string>());
    return vocab;
}

inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in = detail::open_input(path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(detail::ascii_lower(line));
    }
    return words;
}

// --- model dump ------------------------------------------------------------

inline json hyper_to_json(const Hyperparameters& h) {
    return json{{"K", h.K},           {"T", h.T},
                {"theta0", h.theta0}, {"lambda0", h.lambda0},
                {"alpha0", h.alpha0}, {"beta0", h.beta0},
                {"gamma0", h.gamma0}, {"rho0", h.rho0},
                {"nu0_scale", h.nu0_scale}, {"c", h.c},
                {"variant", variant_name(h.variant)}};
}

inline Hyperparameters hyper_from_json(const json& j) {
    Hyperparameters h;
    h.K = j.at("K").get<int>();
    h.T = j.at("T").get<int>();
    h.theta0 = j.at("theta0").get<double>();
    h.lambda0 = j.at("lambda0").get<double>();
    h.alpha0 = j.at("alpha0").get<double>();
    h.beta0 = j.at("beta0").get<double>();
    h.gamma0 = j.at("gamma0").get<double>();
    h.rho0 = j.at("rho0").get<double>();
    h.nu0_scale = j.at("nu0_scale").get<double>();
    h.c = j.at("c").get<double>();
    h.variant = variant_from_name(j.at("variant").get<std::string>());
    return h;
}

struct ModelDump {
    Hyperparameters hyper;
    Dispersion rho;
    Permutation pi0;  // 0-based in memory
    std::vector<std::vector<double>> intent_word_dist;  // K x V
    std::vector<std::vector<double>> topic_word_dist;   // T x V
    std::vector<std::string> vocab;
    std::vector<std::array<int, 2>> nv;
};

inline void save_model_dump(const ModelState& st, const Corpus& corpus, const std::string& path) {
    const PointEstimates pe = point_estimates(st);
    json j;
    j["K"] = st.hyper.K;
    j["T"] = st.hyper.T;
    j["rho"] = st.rho;
    json pi0 = json::array();
    for (int x : st.pi0) pi0.push_back(x + 1);
    j["pi0"] = std::move(pi0);
    j["hyper"] = hyper_to_json(st.hyper);

    json iw = json::array();
    for (int k = 0; k < pe.K; ++k) {
        json row = json::array();
        for (int v = 0; v < pe.V; ++v) row.push_back(pe.intent_at(k, v));
        iw.push_back(std::move(row));
    }
    j["intent_word_dist"] = std::move(iw);
    json tw = json::array();
    for (int t = 0; t < pe.T; ++t) {
        json row = json::array();
        for (int v = 0; v < pe.V; ++v) row.push_back(pe.topic_at(t, v));
        tw.push_back(std::move(row));
    }
    j["topic_word_dist"] = std::move(tw);

    j["vocab"] = corpus.vocab.words();
    json nv = json::array();
    for (const auto& pair : st.counts.nv) nv.push_back(json::array({pair[0], pair[1]}));
    j["nv"] = std::move(nv);
    detail::open_output(path) << j.dump() << "\n";
}

inline ModelDump load_model_dump(const std::string& path) {
    json j = json::parse(detail::open_input(path));
    ModelDump dump;
    dump.hyper = hyper_from_json(j.at("hyper"));
    dump.rho = j.at("rho").get<std::vector<double>>();
    for (const auto& x : j.at("pi0")) dump.pi0.push_back(x.get<int>() - 1);
    dump.intent_word_dist = j.at("intent_word_dist").get<std::vector<std::vector<double>>>();
    dump.topic_word_dist = j.at("topic_word_dist").get<std::vector<std::vector<double>>>();
    if (j.contains("vocab")) dump.vocab = j.at("vocab").get<std::vector<std::string>>();
    if (j.contains("nv"))
        for (const auto& pair : j.at("nv"))
            dump.nv.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
    return dump;
}

// --- assignments -----------------------------------------------------------

inline void save_assignments(const ModelState& st, const Corpus& corpus, const std::string& path) {
    std::ofstream out = detail::open_output(path);
    for (int d = 0; d < corpus.num_docs(); ++d) {
        const auto& a = st.assign;
        json j;
        j["id"] = corpus.documents[static_cast<std::size_t>(d)].id;
        json z = json::array(), u = json::array(), pi = json::array();
        for (int x : a.z[static_cast<std::size_t>(d)]) z.push_back(x + 1);
        for (int x : a.u[static_cast<std::size_t>(d)]) u.push_back(x + 1);
        for (int x : a.pi[static_cast<std::size_t>(d)]) pi.push_back(x + 1);
        j["z"] = std::move(z);
        j["u"] = std::move(u);
        j["pi"] = std::move(pi);
        json b = json::array(), t = json::array();
        for (std::size_t s = 0; s < a.b[static_cast<std::size_t>(d)].size(); ++s) {
            json bs = json::array(), ts = json::array();
            for (std::size_t m = 0; m < a.b[static_cast<std::size_t>(d)][s].size(); ++m) {
                const bool topic = a.b[static_cast<std::size_t>(d)][s][m] != 0;
                bs.push_back(topic ? 1 : 0);
                if (topic)
                    ts.push_back(a.t[static_cast<std::size_t>(d)][s][m] + 1);
                else
                    ts.push_back(nullptr);
            }
            b.push_back(std::move(bs));
            t.push_back(std::move(ts));
        }
        j["b"] = std::move(b);
        j["t"] = std::move(t);
        out << j.dump() << "\n";
    }
}

struct DocAssignments {
    std::string id;
    std::vector<int> z;  // 0-based
    std::vector<int> u;
    Permutation pi;
    std::vector<std::vector<int>> b;
    std::vector<std::vector<int>> t;  // -1 where b = 0
};

inline std::vector<DocAssignments> load_assignments(const std::string& path) {
    std::ifstream in = detail::open_input(path);
    std::vector<DocAssignments> docs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": parse error: " + e.what());
        }
        DocAssignments da;
        da.id = j.at("id").get<std::string>();
        for (const auto& x : j.at("z")) da.z.push_back(x.get<int>() - 1);
        for (const auto& x : j.at("u")) da.u.push_back(x.get<int>() - 1);
        for (const auto& x : j.at("pi")) da.pi.push_back(x.get<int>() - 1);
        for (const auto& row : j.at("b")) da.b.push_back(row.get<std::vector<int>>());
        for (const auto& row : j.at("t")) {
            std::vector<int> ts;
            for (const auto& x : row) ts.push_back(x.is_null() ? -1 : x.get<int>() - 1);
            da.t.push_back(std::move(ts));
        }
        docs.push_back(std::move(da));
    }
    return docs;
}

// --- diagnostics / metrics / split ------------------------------------------

inline void save_diagnostics_csv(const ChainDiagnostics& diag, const std::string& path) {
    std::ofstream out = detail::open_output(path);
    out << "iteration,joint_log_score,intent_fraction,mean_rho\n";
    out.precision(17);
    for (const auto& row : diag)
        out << row.iteration << "," << row.joint_log_score << "," << row.intent_fraction << ","
            << row.mean_rho << "\n";
}

inline json metrics_to_json(const MetricsReport& report) {
    auto run_json = [](const RunMetrics& m, bool with_seed) {
        json j{{"ari", m.ari},
               {"recall", m.recall},
               {"precision", m.precision},
               {"fscore", m.fscore}};
        if (m.acc) j["accuracy"] = *m.acc;
        if (with_seed) j["seed"] = m.seed;
        return j;
    };
    json j = run_json(report.mean, false);
    j["mean"] = run_json(report.mean, false);
    j["runs"] = json::array();
    for (const auto& r : report.runs) j["runs"].push_back(run_json(r, true));
    return j;
}

inline void save_metrics(const MetricsReport& report, const std::string& path) {
    detail::open_output(path) << metrics_to_json(report).dump(2) << "\n";
}

inline void save_split(const std::vector<std::string>& labeled_ids, const std::string& path) {
    json j;
    j["labeled_ids"] = labeled_ids;
    detail::open_output(path) << j.dump() << "\n";
}

inline std::vector<std::string> load_split(const std::string& path) {
    json j = json::parse(detail::open_input(path));
    return j.at("labeled_ids").get<std::vector<std::string>>();
}

}  // namespace gmmlda
