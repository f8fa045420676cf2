// Command-line front end: preprocess / train / eval / synth / inspect.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "gmmlda/gmmlda.hpp"

namespace fs = std::filesystem;
using namespace gmmlda;

namespace {

struct CommonOpts {
    std::string corpus_path;
    std::string stopwords_path;
    std::string out_dir;
    std::string split_path;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    Hyperparameters hyper;
    std::string variant = "full";
    std::string prediction = "last";
    int iterations = 2000;
    int report_every = 100;
    int jobs = 0;
    bool no_preprocess = false;
    int min_count = 3;
    int min_sentence_tokens = 5;
};

void add_hyper_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--k", o.hyper.K, "number of intents")->required();
    cmd->add_option("--t", o.hyper.T, "number of topics")->capture_default_str();
    cmd->add_option("--theta0", o.hyper.theta0, "doc-topic concentration")->capture_default_str();
    cmd->add_option("--lambda0", o.hyper.lambda0, "intent-usage concentration")->capture_default_str();
    cmd->add_option("--alpha0", o.hyper.alpha0, "intent-word concentration")->capture_default_str();
    cmd->add_option("--beta0", o.hyper.beta0, "topic-word concentration")->capture_default_str();
    cmd->add_option("--gamma0", o.hyper.gamma0, "word-type Beta concentration")->capture_default_str();
    cmd->add_option("--rho0", o.hyper.rho0, "prior dispersion")->capture_default_str();
    cmd->add_option("--nu0-scale", o.hyper.nu0_scale, "nu0 as a multiple of D")->capture_default_str();
    cmd->add_option("--c", o.hyper.c, "entropic regularization weight")->capture_default_str();
    cmd->add_option("--variant", o.variant, "full | intent_only | uniform_order")
        ->check(CLI::IsMember({"full", "intent_only", "uniform_order"}))
        ->capture_default_str();
}

PredictionRule parse_prediction(const std::string& s, int& tail_n) {
    if (s == "last") return PredictionRule::last_sample;
    if (s.rfind("mode:", 0) == 0) {
        tail_n = std::stoi(s.substr(5));
        if (tail_n < 1) throw CLI::ValidationError("--prediction", "mode:N needs N >= 1");
        return PredictionRule::mode_over_tail;
    }
    throw CLI::ValidationError("--prediction", "expected 'last' or 'mode:N'");
}

Corpus load_train_corpus(const CommonOpts& o) {
    const RawCorpus raw = load_raw_corpus(o.corpus_path);
    if (o.no_preprocess) return index_corpus(raw);
    PreprocessConfig cfg;
    cfg.min_token_count = o.min_count;
    cfg.min_sentence_tokens = o.min_sentence_tokens;
    if (!o.stopwords_path.empty()) cfg.stopwords = load_stopwords(o.stopwords_path);
    return preprocess(raw, cfg);
}

std::vector<int> resolve_split(const Corpus& corpus, const std::string& split_path) {
    if (split_path.empty()) return {};
    const std::vector<std::string> ids = load_split(split_path);
    std::unordered_map<std::string, int> index;
    for (int d = 0; d < corpus.num_docs(); ++d)
        index.emplace(corpus.documents[static_cast<std::size_t>(d)].id, d);
    std::vector<int> docs;
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end())
            throw std::runtime_error("split references unknown doc id: " + id);
        docs.push_back(it->second);
    }
    std::sort(docs.begin(), docs.end());
    return docs;
}

int cmd_preprocess(const CommonOpts& o) {
    const RawCorpus raw = load_raw_corpus(o.corpus_path);
    PreprocessConfig cfg;
    cfg.min_token_count = o.min_count;
    cfg.min_sentence_tokens = o.min_sentence_tokens;
    if (!o.stopwords_path.empty()) cfg.stopwords = load_stopwords(o.stopwords_path);
    const Corpus corpus = preprocess(raw, cfg);
    fs::create_directories(o.out_dir);
    save_corpus(corpus, o.out_dir + "/preprocessed.jsonl");
    save_vocabulary(corpus.vocab, o.out_dir + "/vocab.json");
    const CorpusStats st = corpus_stats(corpus);
    std::printf("docs=%d sentences=%d vocab=%d tokens=%lld\n", st.docs, st.sentences, st.vocab,
                static_cast<long long>(st.tokens));
    return 0;
}

int cmd_train(CommonOpts& o) {
    Corpus corpus = load_train_corpus(o);
    if (corpus.num_docs() == 0) throw std::runtime_error("train: corpus is empty");
    o.hyper.variant = variant_from_name(o.variant);
    o.hyper.validate();

    TrainSpec spec;
    spec.hyper = o.hyper;
    spec.gibbs.iterations = o.iterations;
    spec.gibbs.report_every = o.report_every;
    spec.gibbs.prediction = parse_prediction(o.prediction, spec.gibbs.tail_n);
    spec.locked_docs = resolve_split(corpus, o.split_path);
    if (!spec.locked_docs.empty() && corpus.label_names.empty())
        throw std::runtime_error("train: supervised mode requires sentence labels");
    if (!corpus.label_names.empty() &&
        static_cast<int>(corpus.label_names.size()) > o.hyper.K && !spec.locked_docs.empty())
        throw std::runtime_error("train: K is smaller than the number of distinct labels");

    fs::create_directories(o.out_dir);
    save_corpus(corpus, o.out_dir + "/preprocessed.jsonl");
    save_vocabulary(corpus.vocab, o.out_dir + "/vocab.json");

    const std::vector<SeedRun> runs = train_many(corpus, spec, o.seeds, o.jobs);
    for (const auto& run : runs) {
        const std::string tag = std::to_string(run.seed);
        save_model_dump(run.state, corpus, o.out_dir + "/model_seed" + tag + ".json");
        save_assignments(run.state, corpus, o.out_dir + "/assignments_seed" + tag + ".jsonl");
        save_diagnostics_csv(run.result.diagnostics, o.out_dir + "/diagnostics_seed" + tag + ".csv");
        std::printf("seed %s: final joint_log_score=%.4f\n", tag.c_str(),
                    run.result.diagnostics.empty() ? 0.0
                                                   : run.result.diagnostics.back().joint_log_score);
    }
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& pred_dir, const std::string& out_path) {
    const RawCorpus raw = load_raw_corpus(o.corpus_path);
    const Corpus corpus = index_corpus(raw);
    if (corpus.label_names.empty())
        throw std::runtime_error("eval: corpus has no sentence labels to score against");
    const std::vector<int> exclude = resolve_split(corpus, o.split_path);
    const bool with_acc = !o.split_path.empty();

    std::unordered_map<std::string, int> doc_index;
    for (int d = 0; d < corpus.num_docs(); ++d)
        doc_index.emplace(corpus.documents[static_cast<std::size_t>(d)].id, d);
    const std::vector<int> docs = eval_doc_set(corpus, exclude);
    const std::vector<int> truth = flatten_truth(corpus, docs);

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(pred_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("assignments_seed", 0) == 0 && name.size() > 5 &&
            name.substr(name.size() - 6) == ".jsonl")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("eval: no assignments_seed*.jsonl files in " + pred_dir);

    MetricsReport report;
    for (const auto& file : files) {
        const std::vector<DocAssignments> docs_assign = load_assignments(file);
        std::vector<std::vector<int>> z_by_doc(static_cast<std::size_t>(corpus.num_docs()));
        for (const auto& da : docs_assign) {
            auto it = doc_index.find(da.id);
            if (it == doc_index.end())
                throw std::runtime_error("eval: assignments reference unknown doc id: " + da.id);
            z_by_doc[static_cast<std::size_t>(it->second)] = da.z;
        }
        std::vector<int> pred;
        for (int d : docs) {
            if (z_by_doc[static_cast<std::size_t>(d)].empty())
                throw std::runtime_error("eval: missing predictions for doc " +
                                         corpus.documents[static_cast<std::size_t>(d)].id);
            pred.insert(pred.end(), z_by_doc[static_cast<std::size_t>(d)].begin(),
                        z_by_doc[static_cast<std::size_t>(d)].end());
        }
        if (pred.size() != truth.size())
            throw std::runtime_error("eval: prediction/truth length mismatch for " + file);
        // seed recovered from the filename tail
        const std::string stem = fs::path(file).stem().string();
        const std::uint64_t seed = std::stoull(stem.substr(std::string("assignments_seed").size()));
        report.runs.push_back(compute_run_metrics(seed, pred, truth, with_acc));
    }
    report.mean = mean_metrics(report.runs);

    const json j = metrics_to_json(report);
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        save_metrics(report, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_synth(CommonOpts& o, GenSizes& sizes, std::uint64_t seed) {
    o.hyper.variant = variant_from_name(o.variant);
    o.hyper.validate();
    Rng rng(seed);
    const Generated gen = forward_generate(o.hyper, sizes, rng);
    fs::create_directories(o.out_dir);
    save_corpus(gen.corpus, o.out_dir + "/corpus.jsonl");

    ModelState truth_state;
    truth_state.hyper = o.hyper;
    truth_state.assign = gen.truth;
    truth_state.counts = rebuild_counts(gen.corpus, gen.truth, o.hyper.K, o.hyper.T);
    truth_state.rho = gen.rho;
    truth_state.pi0 = identity_permutation(o.hyper.K);
    save_assignments(truth_state, gen.corpus, o.out_dir + "/truth_assignments.jsonl");
    const CorpusStats st = corpus_stats(gen.corpus);
    std::printf("docs=%d sentences=%d vocab=%d tokens=%lld\n", st.docs, st.sentences, st.vocab,
                static_cast<long long>(st.tokens));
    return 0;
}

int cmd_inspect(const std::string& model_path, int top_n, bool as_json) {
    if (top_n < 1) throw std::runtime_error("inspect: --n must be >= 1");
    const ModelDump dump = load_model_dump(model_path);
    const int V = static_cast<int>(dump.vocab.size());
    if (V == 0) throw std::runtime_error("inspect: model dump has no vocabulary");
    const int n = std::min(top_n, V);

    auto word = [&dump](int v) { return dump.vocab[static_cast<std::size_t>(v)]; };
    auto top_of = [n, V](const std::vector<double>& row) {
        std::vector<int> idx(static_cast<std::size_t>(V));
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + n, idx.end(), [&row](int a, int b) {
            if (row[static_cast<std::size_t>(a)] != row[static_cast<std::size_t>(b)])
                return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
            return a < b;
        });
        idx.resize(static_cast<std::size_t>(n));
        return idx;
    };

    // word types ranked by corpus frequency
    std::vector<int> intent_words, topic_words;
    if (!dump.nv.empty()) {
        std::vector<int> by_freq(static_cast<std::size_t>(V));
        std::iota(by_freq.begin(), by_freq.end(), 0);
        std::sort(by_freq.begin(), by_freq.end(), [&dump](int a, int b) {
            const auto fa = dump.nv[static_cast<std::size_t>(a)][0] + dump.nv[static_cast<std::size_t>(a)][1];
            const auto fb = dump.nv[static_cast<std::size_t>(b)][0] + dump.nv[static_cast<std::size_t>(b)][1];
            if (fa != fb) return fa > fb;
            return a < b;
        });
        for (int v : by_freq) {
            const bool intent = dump.nv[static_cast<std::size_t>(v)][0] > dump.nv[static_cast<std::size_t>(v)][1];
            auto& dst = intent ? intent_words : topic_words;
            if (static_cast<int>(dst.size()) < n) dst.push_back(v);
        }
    }

    json j;
    j["pi0"] = json::array();
    for (int x : dump.pi0) j["pi0"].push_back(x + 1);
    j["intents"] = json::array();
    // intents listed in canonical order, numbered from 0
    for (std::size_t pos = 0; pos < dump.pi0.size(); ++pos) {
        const int k = dump.pi0[pos];
        json row;
        row["no"] = pos;
        row["intent"] = k + 1;
        row["words"] = json::array();
        for (int v : top_of(dump.intent_word_dist[static_cast<std::size_t>(k)]))
            row["words"].push_back(word(v));
        j["intents"].push_back(std::move(row));
    }
    j["topics"] = json::array();
    for (std::size_t t = 0; t < dump.topic_word_dist.size(); ++t) {
        json row;
        row["topic"] = t + 1;
        row["words"] = json::array();
        for (int v : top_of(dump.topic_word_dist[t])) row["words"].push_back(word(v));
        j["topics"].push_back(std::move(row));
    }
    j["intent_type_words"] = json::array();
    for (int v : intent_words) j["intent_type_words"].push_back(word(v));
    j["topic_type_words"] = json::array();
    for (int v : topic_words) j["topic_type_words"].push_back(word(v));

    if (as_json) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::printf("canonical order pi0:");
    for (int x : dump.pi0) std::printf(" %d", x + 1);
    std::printf("\n\nintents (canonical order):\n");
    for (const auto& row : j["intents"]) {
        std::printf("  %d. intent %d:", row["no"].get<int>(), row["intent"].get<int>());
        for (const auto& w : row["words"]) std::printf(" %s", w.get<std::string>().c_str());
        std::printf("\n");
    }
    std::printf("\ntopics:\n");
    for (const auto& row : j["topics"]) {
        std::printf("  topic %d:", row["topic"].get<int>());
        for (const auto& w : row["words"]) std::printf(" %s", w.get<std::string>().c_str());
        std::printf("\n");
    }
    if (!intent_words.empty() || !topic_words.empty()) {
        std::printf("\nmost common intent-type words:");
        for (int v : intent_words) std::printf(" %s", word(v).c_str());
        std::printf("\nmost common topic-type words:");
        for (int v : topic_words) std::printf(" %s", word(v).c_str());
        std::printf("\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint topic / sentence-intent model with global order structure"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags take precedence");

    CommonOpts o;
    o.hyper.T = 10;
    GenSizes sizes;
    std::string pred_dir, out_path, model_path;
    std::uint64_t synth_seed = 1;
    int top_n = 18;
    bool as_json = false;

    auto* pre = app.add_subcommand("preprocess", "filter and index a corpus");
    pre->add_option("--corpus", o.corpus_path, "corpus JSONL")->required();
    pre->add_option("--stopwords", o.stopwords_path, "stopword file");
    pre->add_option("--out", o.out_dir, "output directory")->required();
    pre->add_option("--min-count", o.min_count, "minimum corpus frequency")->capture_default_str();
    pre->add_option("--min-sentence-tokens", o.min_sentence_tokens, "minimum sentence length")
        ->capture_default_str();

    auto* train = app.add_subcommand("train", "run Gibbs chains");
    train->add_option("--corpus", o.corpus_path, "corpus JSONL")->required();
    train->add_option("--stopwords", o.stopwords_path, "stopword file");
    train->add_option("--out", o.out_dir, "output directory")->required();
    add_hyper_flags(train, o);
    train->add_option("--iters", o.iterations, "sweeps per chain")->capture_default_str();
    train->add_option("--seed", o.seeds, "chain seeds (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    train->add_option("--labeled-split", o.split_path, "JSON with labeled_ids to lock");
    train->add_option("--prediction", o.prediction, "last | mode:N")->capture_default_str();
    train->add_option("--report-every", o.report_every, "diagnostics cadence")->capture_default_str();
    train->add_option("--jobs", o.jobs, "parallel chains (0 = auto)")->capture_default_str();
    train->add_flag("--no-preprocess", o.no_preprocess, "use the corpus tokens as-is");
    train->add_option("--min-count", o.min_count, "minimum corpus frequency")->capture_default_str();
    train->add_option("--min-sentence-tokens", o.min_sentence_tokens, "minimum sentence length")
        ->capture_default_str();

    auto* ev = app.add_subcommand("eval", "score predictions against labels");
    ev->add_option("--corpus", o.corpus_path, "corpus JSONL (as written by train)")->required();
    ev->add_option("--pred", pred_dir, "directory with assignments_seed*.jsonl")->required();
    ev->add_option("--labeled-split", o.split_path, "training split to exclude (enables accuracy)");
    ev->add_option("--out", out_path, "metrics JSON path (default: stdout)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--out", o.out_dir, "output directory")->required();
    add_hyper_flags(synth, o);
    synth->add_option("--v", sizes.vocab, "vocabulary size")->required();
    synth->add_option("--docs", sizes.docs, "number of documents")->required();
    synth->add_option("--sentences", sizes.mean_sentences, "mean sentences per doc")
        ->capture_default_str();
    synth->add_option("--tokens", sizes.mean_tokens, "mean tokens per sentence")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();

    auto* ins = app.add_subcommand("inspect", "top words per intent/topic from a model dump");
    ins->add_option("--model", model_path, "model dump JSON")->required();
    ins->add_option("--n", top_n, "words per table")->capture_default_str();
    ins->add_flag("--json", as_json, "emit JSON instead of text");

    for (auto* cmd : {pre, train, ev, synth, ins}) cmd->configurable();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) return cmd_preprocess(o);
        if (train->parsed()) return cmd_train(o);
        if (ev->parsed()) return cmd_eval(o, pred_dir, out_path);
        if (synth->parsed()) return cmd_synth(o, sizes, synth_seed);
        if (ins->parsed()) return cmd_inspect(model_path, top_n, as_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
