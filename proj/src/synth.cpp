#include "assocprf/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"

namespace assocprf {
namespace {

constexpr std::size_t kHeadDocs = 6;
constexpr std::size_t kTailDocs = 14;
constexpr std::size_t kPlainRelevant = 15;
constexpr std::size_t kPlantedDistractors = 8;
constexpr std::size_t kPlantedDecoys = 1;  // outranks the head documents before expansion
constexpr std::size_t kPlainDistractors = 15;
constexpr std::size_t kTopicWords = 3;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Modulo bias is below 2^-50 for the ranges used here.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(std::size_t numerator, std::size_t denominator) { return below(denominator) < numerator; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static constexpr char kConsonants[] = "bdfgklmnprstvz";
    static constexpr char kVowels[] = "aeiou";
    for (;;) {
      std::string word;
      const std::size_t syllables = rng_.between(2, 4);
      for (std::size_t s = 0; s < syllables; ++s) {
        word += kConsonants[rng_.below(sizeof kConsonants - 1)];
        word += kVowels[rng_.below(sizeof kVowels - 1)];
      }
      if (used_.insert(word).second) return word;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

// Zipf-Mandelbrot background, weight(k) = 1e9 / (k + 10), integer only.
class Background {
 public:
  Background(std::vector<std::string> words) : words_(std::move(words)) {
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= words_.size(); ++k) {
      total += 1'000'000'000ULL / (k + 10);
      cumulative_.push_back(total);
    }
  }

  const std::string& sample(Rng& rng) const {
    const std::uint64_t r = rng.below(cumulative_.back());
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return words_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> cumulative_;
};

void plant(Rng& rng, std::vector<std::string>& doc, const std::string& word, std::size_t count) {
  for (std::size_t c = 0; c < count; ++c) {
    const auto pos = static_cast<std::ptrdiff_t>(rng.below(doc.size() + 1));
    doc.insert(doc.begin() + pos, word);
  }
}

std::string doc_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc_%05zu.txt", i + 1);
  return buf;
}

std::string query_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%02zu", i + 1);
  return buf;
}

std::vector<std::size_t> pick_outside(Rng& rng, std::size_t docs, const std::set<std::size_t>& excluded,
                                      std::size_t count) {
  std::set<std::size_t> picked;
  while (picked.size() < count) {
    const std::size_t d = rng.below(docs);
    if (!excluded.contains(d)) picked.insert(d);
  }
  std::vector<std::size_t> out(picked.begin(), picked.end());
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (queries == 0) throw std::invalid_argument("synthetic corpus needs at least one query");
  if (planted > queries) throw std::invalid_argument("more planted queries than queries");
  if (min_length == 0 || min_length > max_length) throw std::invalid_argument("bad document length range");
  if (vocabulary < 100) throw std::invalid_argument("background vocabulary must be >= 100 words");
  const std::size_t relevant = planted * (kHeadDocs + kTailDocs) + (queries - planted) * kPlainRelevant;
  if (documents < relevant + kPlainDistractors)
    throw std::invalid_argument("need at least " + std::to_string(relevant + kPlainDistractors) +
                                " documents for " + std::to_string(queries) + " queries");
}

SynthCorpus generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  WordFactory words(rng);

  std::vector<std::string> vocabulary;
  vocabulary.reserve(config.vocabulary);
  for (std::size_t i = 0; i < config.vocabulary; ++i) vocabulary.push_back(words.fresh());
  const Background background(vocabulary);

  std::vector<std::vector<std::string>> docs(config.documents);
  for (auto& doc : docs) {
    const std::size_t length = rng.between(config.min_length, config.max_length);
    doc.reserve(length + 32);
    for (std::size_t i = 0; i < length; ++i) doc.push_back(background.sample(rng));
  }

  std::vector<std::size_t> order(config.documents);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::size_t> query_order(config.queries);
  for (std::size_t i = 0; i < query_order.size(); ++i) query_order[i] = i;
  rng.shuffle(query_order);
  std::vector<bool> is_planted(config.queries, false);
  for (std::size_t i = 0; i < config.planted; ++i) is_planted[query_order[i]] = true;

  SynthCorpus corpus;
  std::size_t next_doc = 0;
  auto take = [&](std::size_t n) {
    std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(next_doc),
                                 order.begin() + static_cast<std::ptrdiff_t>(next_doc + n));
    next_doc += n;
    return ids;
  };

  for (std::size_t q = 0; q < config.queries; ++q) {
    const std::string qid = query_name(q);
    const std::string term_a = words.fresh();
    const std::string term_b = words.fresh();
    corpus.queries.push_back({qid, term_a + " " + term_b});

    std::vector<std::size_t> relevant;
    std::vector<std::size_t> distractors;
    if (is_planted[q]) {
      PlantedQuery p{qid, {term_a, term_b}, words.fresh(), {}, {}};
      const auto head = take(kHeadDocs);
      const auto tail = take(kTailDocs);
      for (std::size_t d : head) {
        plant(rng, docs[d], term_a, rng.between(1, 3));
        plant(rng, docs[d], term_b, rng.between(1, 3));
        plant(rng, docs[d], p.expansion_term, rng.between(5, 7));
        p.head_docs.push_back(doc_name(d));
      }
      for (std::size_t d : tail) {
        plant(rng, docs[d], p.expansion_term, rng.between(3, 5));
        p.tail_docs.push_back(doc_name(d));
      }
      relevant = head;
      relevant.insert(relevant.end(), tail.begin(), tail.end());
      distractors = pick_outside(rng, config.documents, {relevant.begin(), relevant.end()},
                                 kPlantedDecoys + kPlantedDistractors);
      for (std::size_t i = 0; i < kPlantedDecoys; ++i) {
        plant(rng, docs[distractors[i]], term_a, rng.between(6, 8));
        plant(rng, docs[distractors[i]], term_b, rng.between(6, 8));
      }
      for (std::size_t i = kPlantedDecoys; i < distractors.size(); ++i) {
        const std::size_t d = distractors[i];
        if (rng.chance(1, 4)) {
          plant(rng, docs[d], term_a, 1);
          plant(rng, docs[d], term_b, 1);
        } else {
          plant(rng, docs[d], rng.chance(1, 2) ? term_a : term_b, 1);
        }
      }
      corpus.planted.push_back(std::move(p));
    } else {
      std::vector<std::string> topic;
      for (std::size_t i = 0; i < kTopicWords; ++i) topic.push_back(words.fresh());
      relevant = take(kPlainRelevant);
      for (std::size_t d : relevant) {
        if (rng.chance(3, 5)) plant(rng, docs[d], term_a, rng.between(1, 3));
        if (rng.chance(3, 5)) plant(rng, docs[d], term_b, rng.between(1, 3));
        for (const auto& w : topic) {
          if (rng.chance(1, 2)) plant(rng, docs[d], w, rng.between(1, 2));
        }
      }
      distractors = pick_outside(rng, config.documents, {relevant.begin(), relevant.end()},
                                 kPlainDistractors);
      for (std::size_t d : distractors) {
        plant(rng, docs[d], rng.chance(1, 2) ? term_a : term_b, rng.between(1, 2));
        if (rng.chance(1, 3)) plant(rng, docs[d], topic[0], 1);
      }
    }
    for (std::size_t d : relevant) corpus.qrels.push_back({qid, doc_name(d), 1});
    for (std::size_t d : distractors) corpus.qrels.push_back({qid, doc_name(d), 0});
  }

  std::sort(corpus.qrels.begin(), corpus.qrels.end(), [](const QrelLine& a, const QrelLine& b) {
    return std::tie(a.qid, a.external_id) < std::tie(b.qid, b.external_id);
  });

  corpus.documents.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::string text;
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      text += docs[d][i];
      text += (i + 1) % 12 == 0 || i + 1 == docs[d].size() ? '\n' : ' ';
    }
    corpus.documents.emplace_back(doc_name(d), std::move(text));
  }
  return corpus;
}

void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path docs_dir = out_dir / "corpus";
  fs::create_directories(docs_dir);
  for (const auto& [name, text] : corpus.documents) write_file_atomic(docs_dir / name, text);

  std::string queries = "# qid\tquery text\n";
  for (const auto& q : corpus.queries) queries += q.id + "\t" + q.text + "\n";
  write_file_atomic(out_dir / "queries.tsv", queries);

  std::string qrels;
  for (const auto& line : corpus.qrels)
    qrels += line.qid + " 0 " + line.external_id + " " + std::to_string(line.relevance) + "\n";
  write_file_atomic(out_dir / "qrels.txt", qrels);

  std::string planted = "# qid\tquery terms\texpansion term\thead docs\ttail docs\n";
  for (const auto& p : corpus.planted) {
    planted += p.qid + "\t" + join(p.query_terms, ' ') + "\t" + p.expansion_term + "\t" +
               join(p.head_docs, ' ') + "\t" + join(p.tail_docs, ' ') + "\n";
  }
  write_file_atomic(out_dir / "planted.tsv", planted);
}

std::vector<PlantedQuery> read_planted(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<PlantedQuery> planted;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) tab = line.size();
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 5) throw ParseError(path.string(), number, "expected 5 tab-separated fields");
    planted.push_back({fields[0], split(fields[1], ' '), fields[2], split(fields[3], ' '),
                       split(fields[4], ' ')});
  }
  return planted;
}

}  // namespace assocprf
