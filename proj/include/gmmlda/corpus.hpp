#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gmmlda {

// Pre-tokenized document as read from disk, tokens still strings.
struct RawDocument {
    std::string id;
    std::vector<std::vector<std::string>> sentences;
    std::optional<std::vector<std::string>> labels;  // aligned to sentences when present
};

struct RawCorpus {
    std::vector<RawDocument> documents;
};

class Vocabulary {
public:
    int add(const std::string& word) {
        auto it = index_.find(word);
        if (it != index_.end()) return it->second;
        const int id = static_cast<int>(words_.size());
        words_.push_back(word);
        index_.emplace(word, id);
        return id;
    }

    // -1 when absent
    int id_of(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(words_.size()); }
    const std::vector<std::string>& words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
};

// Vocabulary-indexed document; labels are 0-based intent ids into the corpus
// label set, empty when the document is unlabeled.
struct IndexedDocument {
    std::string id;
    std::vector<std::vector<int>> sentences;
    std::vector<int> labels;
};

struct Corpus {
    std::vector<IndexedDocument> documents;
    Vocabulary vocab;
    std::vector<std::string> label_names;  // sorted; index = intent id

    int num_docs() const { return static_cast<int>(documents.size()); }

    int num_sentences() const {
        int n = 0;
        for (const auto& d : documents) n += static_cast<int>(d.sentences.size());
        return n;
    }

    std::int64_t num_tokens() const {
        std::int64_t n = 0;
        for (const auto& d : documents)
            for (const auto& s : d.sentences) n += static_cast<std::int64_t>(s.size());
        return n;
    }

    bool has_labels(int d) const { return !documents[static_cast<std::size_t>(d)].labels.empty(); }
};

struct PreprocessConfig {
    std::unordered_set<std::string> stopwords;  // compared against lowercased tokens
    int min_token_count = 3;
    int min_sentence_tokens = 5;
    bool drop_non_alphabetic = true;
    bool drop_length_one = true;
};

struct CorpusStats {
    int docs = 0;
    int sentences = 0;
    int vocab = 0;
    std::int64_t tokens = 0;
};

inline CorpusStats corpus_stats(const Corpus& c) {
    return CorpusStats{c.num_docs(), c.num_sentences(), c.vocab.size(), c.num_tokens()};
}

namespace detail {

inline std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool all_ascii_alpha(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return false;
    return true;
}

inline std::vector<std::string> sorted_unique_labels(const RawCorpus& raw) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& doc : raw.documents)
        if (doc.labels)
            for (const auto& l : *doc.labels)
                if (seen.insert(l).second) names.push_back(l);
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace detail

inline void validate_raw_corpus(const RawCorpus& raw) {
    std::unordered_set<std::string> ids;
    for (const auto& doc : raw.documents) {
        if (!ids.insert(doc.id).second)
            throw std::runtime_error("duplicate doc_id: " + doc.id);
        if (doc.labels && doc.labels->size() != doc.sentences.size())
            throw std::runtime_error("label count mismatch in doc " + doc.id);
    }
}

// Index a raw corpus without any filtering. When `fixed_vocab` is supplied the
// token ids come from it and unknown tokens are an error (used to reload
// preprocessed dumps against their sidecar vocabulary).
inline Corpus index_corpus(const RawCorpus& raw, const Vocabulary* fixed_vocab = nullptr) {
    validate_raw_corpus(raw);
    Corpus out;
    if (fixed_vocab) out.vocab = *fixed_vocab;
    out.label_names = detail::sorted_unique_labels(raw);
    std::unordered_map<std::string, int> label_id;
    for (int i = 0; i < static_cast<int>(out.label_names.size()); ++i)
        label_id.emplace(out.label_names[static_cast<std::size_t>(i)], i);

    for (const auto& doc : raw.documents) {
        IndexedDocument d;
        d.id = doc.id;
        for (const auto& sent : doc.sentences) {
            std::vector<int> ids;
            ids.reserve(sent.size());
            for (const auto& tok : sent) {
                if (fixed_vocab) {
                    const int id = out.vocab.id_of(tok);
                    if (id < 0)
                        throw std::runtime_error("token not in vocabulary: " + tok);
                    ids.push_back(id);
                } else {
                    ids.push_back(out.vocab.add(tok));
                }
            }
            d.sentences.push_back(std::move(ids));
        }
        if (doc.labels)
            for (const auto& l : *doc.labels) d.labels.push_back(label_id.at(l));
        out.documents.push_back(std::move(d));
    }
    return out;
}

// Filter pipeline, in fixed order per pass: lowercase, stopwords,
// non-alphabetic, length-one, corpus-wide min-count (frequencies taken after
// the first three filters, before sentence dropping), then sentences with too
// few surviving tokens. Dropping a sentence can push a token back under the
// frequency floor, so the min-count + sentence-length pair is iterated to a
// fixed point; the output therefore satisfies both filters simultaneously and
// re-preprocessing it is a no-op. Documents reduced to zero sentences are
// dropped.
inline Corpus preprocess(const RawCorpus& raw, const PreprocessConfig& cfg) {
    if (cfg.min_token_count < 1 || cfg.min_sentence_tokens < 1)
        throw std::invalid_argument("preprocess: min counts must be >= 1");
    validate_raw_corpus(raw);

    auto passes_base = [&cfg](const std::string& tok) {
        if (cfg.stopwords.count(tok)) return false;
        if (cfg.drop_non_alphabetic && !detail::all_ascii_alpha(tok)) return false;
        if (cfg.drop_length_one && tok.size() <= 1) return false;
        return true;
    };

    // lowercase + base filters
    std::vector<std::vector<std::vector<std::string>>> kept(raw.documents.size());
    for (std::size_t di = 0; di < raw.documents.size(); ++di) {
        const auto& doc = raw.documents[di];
        kept[di].resize(doc.sentences.size());
        for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
            for (const auto& tok : doc.sentences[si]) {
                std::string low = detail::ascii_lower(tok);
                if (passes_base(low)) kept[di][si].push_back(std::move(low));
            }
        }
    }

    // min-count then sentence-length, iterated until stable; dead sentences
    // stay in place (empty) so labels keep their alignment until the end
    std::vector<std::vector<char>> sentence_alive(kept.size());
    for (std::size_t di = 0; di < kept.size(); ++di)
        sentence_alive[di].assign(kept[di].size(), 1);

    for (bool changed = true; changed;) {
        changed = false;
        std::unordered_map<std::string, int> freq;
        for (std::size_t di = 0; di < kept.size(); ++di)
            for (std::size_t si = 0; si < kept[di].size(); ++si)
                if (sentence_alive[di][si])
                    for (const auto& tok : kept[di][si]) ++freq[tok];

        for (std::size_t di = 0; di < kept.size(); ++di) {
            for (std::size_t si = 0; si < kept[di].size(); ++si) {
                if (!sentence_alive[di][si]) continue;
                auto& sent = kept[di][si];
                const auto new_end = std::remove_if(sent.begin(), sent.end(),
                                                    [&](const std::string& tok) {
                                                        return freq.at(tok) < cfg.min_token_count;
                                                    });
                if (new_end != sent.end()) {
                    sent.erase(new_end, sent.end());
                    changed = true;
                }
                if (static_cast<int>(sent.size()) < cfg.min_sentence_tokens) {
                    sentence_alive[di][si] = 0;
                    changed = true;
                }
            }
        }
    }

    Corpus out;
    std::vector<std::string> label_names = detail::sorted_unique_labels(raw);
    std::unordered_map<std::string, int> label_id;
    for (int i = 0; i < static_cast<int>(label_names.size()); ++i)
        label_id.emplace(label_names[static_cast<std::size_t>(i)], i);
    bool any_labels = false;

    for (std::size_t di = 0; di < raw.documents.size(); ++di) {
        const auto& doc = raw.documents[di];
        IndexedDocument d;
        d.id = doc.id;
        for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
            if (!sentence_alive[di][si]) continue;
            std::vector<int> ids;
            ids.reserve(kept[di][si].size());
            for (const auto& tok : kept[di][si]) ids.push_back(out.vocab.add(tok));
            d.sentences.push_back(std::move(ids));
            if (doc.labels) d.labels.push_back(label_id.at((*doc.labels)[si]));
        }
        if (d.sentences.empty()) continue;
        if (!d.labels.empty()) any_labels = true;
        out.documents.push_back(std::move(d));
    }
    if (any_labels) out.label_names = std::move(label_names);
    return out;
}

// String view of an indexed corpus (used for dumps and idempotence checks).
inline RawCorpus corpus_to_raw(const Corpus& c) {
    RawCorpus raw;
    for (const auto& d : c.documents) {
        RawDocument rd;
        rd.id = d.id;
        for (const auto& sent : d.sentences) {
            std::vector<std::string> toks;
            toks.reserve(sent.size());
            for (int id : sent) toks.push_back(c.vocab.word(id));
            rd.sentences.push_back(std::move(toks));
        }
        if (!d.labels.empty()) {
            std::vector<std::string> ls;
            for (int l : d.labels) ls.push_back(c.label_names.at(static_cast<std::size_t>(l)));
            rd.labels = std::move(ls);
        }
        raw.documents.push_back(std::move(rd));
    }
    return raw;
}

}  // namespace gmmlda
