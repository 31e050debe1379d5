#pragma once

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <map>
#include <string>
#include <vector>

#include "refsel/corpus.hpp"
#include "refsel/features.hpp"
#include "refsel/seeding.hpp"

namespace refsel::test {

// The running example: a three-sentence delexicalised document with nine
// entity mentions (four in sentence 0, three in sentence 1, two in
// sentence 2) over six distinct entities.
inline Document table1_document() {
  Document doc;
  doc.doc_id = "table1";
  auto word = [&](const std::string& s, int sent) {
    doc.tokens.push_back({TokenKind::word, s, std::nullopt, sent});
  };
  auto entity = [&](const std::string& id, int sent, SynRole syn, FormLabel form) {
    doc.tokens.push_back({TokenKind::entity, id, id, sent});
    doc.mentions.push_back({static_cast<int>(doc.tokens.size()) - 1, id, form, syn});
  };
  entity("AWH_Engineering_College", 0, SynRole::subject, FormLabel::proper_name);
  word("is", 0);
  word("in", 0);
  entity("Kuttikkattoor", 0, SynRole::object, FormLabel::proper_name);
  word(",", 0);
  entity("India", 0, SynRole::object, FormLabel::proper_name);
  word("in", 0);
  word("the", 0);
  word("state", 0);
  word("of", 0);
  entity("Kerala", 0, SynRole::object, FormLabel::proper_name);
  word(".", 0);
  entity("AWH_Engineering_College", 1, SynRole::subject, FormLabel::description);
  word("has", 1);
  word("250", 1);
  word("employees", 1);
  word("and", 1);
  entity("Kerala", 1, SynRole::subject, FormLabel::proper_name);
  word("is", 1);
  word("ruled", 1);
  word("by", 1);
  entity("Kochi", 1, SynRole::object, FormLabel::proper_name);
  word(".", 1);
  word("The", 2);
  entity("Ganges", 2, SynRole::subject, FormLabel::proper_name);
  word("River", 2);
  word("is", 2);
  word("also", 2);
  word("found", 2);
  word("in", 2);
  entity("India", 2, SynRole::object, FormLabel::proper_name);
  word(".", 2);
  validate_document(doc);
  return doc;
}

// Random documents for property tests; independent of the corpus
// synthesizer so oracle comparisons do not share a generator with the
// planted-rule machinery.
inline Document random_document(Rng& rng, int doc_index) {
  Document doc;
  doc.doc_id = "rand_" + std::to_string(doc_index);
  const int sentences = 1 + static_cast<int>(rng.uniform_int(4));
  const int entities = 1 + static_cast<int>(rng.uniform_int(5));
  for (int s = 0; s < sentences; ++s) {
    const int len = 2 + static_cast<int>(rng.uniform_int(7));
    for (int t = 0; t < len; ++t) {
      if (rng.bernoulli(0.4)) {
        const std::string id = "E" + std::to_string(rng.uniform_int(entities));
        doc.tokens.push_back({TokenKind::entity, id, id, s});
        doc.mentions.push_back({static_cast<int>(doc.tokens.size()) - 1, id,
                                static_cast<FormLabel>(rng.uniform_int(4)),
                                rng.bernoulli(0.5) ? SynRole::subject : SynRole::object});
      } else {
        doc.tokens.push_back({TokenKind::word, "w" + std::to_string(rng.uniform_int(12)),
                              std::nullopt, s});
      }
    }
  }
  validate_document(doc);
  return doc;
}

// Brute-force per-mention scan, written independently of the extractors:
// every question is answered by a fresh quadratic pass over the mention
// list.
inline FeatureVector naive_features(const Document& doc, int m, const EntityMetaTable& meta,
                                    const std::map<std::string, std::size_t>& counts,
                                    const QuantileBounds& bounds) {
  const Mention& target = doc.mentions[m];
  const int target_sentence = doc.tokens[target.token_index].sentence_index;

  int antecedent = -1;
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    if (doc.mentions[i].entity_id != target.entity_id) continue;
    if (doc.mentions[i].token_index >= target.token_index) continue;
    if (antecedent < 0 || doc.mentions[i].token_index > doc.mentions[antecedent].token_index)
      antecedent = static_cast<int>(i);
  }

  FeatureVector fv;
  fv.syn = target.syn;
  fv.dis_stat = antecedent >= 0 ? DisStat::discourse_old : DisStat::discourse_new;

  fv.sen_stat = SenStat::sentence_new;
  for (const Mention& other : doc.mentions) {
    if (other.entity_id == target.entity_id && other.token_index < target.token_index &&
        doc.tokens[other.token_index].sentence_index == target_sentence)
      fv.sen_stat = SenStat::sentence_old;
  }

  if (antecedent < 0) {
    fv.dist_ant = DistAnt::first_mention;
  } else {
    const int d =
        target_sentence - doc.tokens[doc.mentions[antecedent].token_index].sentence_index;
    fv.dist_ant = d == 0 ? DistAnt::same_sentence
                         : (d == 1 ? DistAnt::one_away : DistAnt::more_than_one);
  }

  if (antecedent < 0) {
    fv.int_ref = IntRef::first_mention;
  } else {
    int previous = -1;
    for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
      if (doc.mentions[i].token_index >= target.token_index) continue;
      if (previous < 0 || doc.mentions[i].token_index > doc.mentions[previous].token_index)
        previous = static_cast<int>(i);
    }
    fv.int_ref = doc.mentions[previous].entity_id == target.entity_id
                     ? IntRef::previous_same
                     : IntRef::previous_different;
  }

  fv.loc_pro = (fv.dis_stat == DisStat::discourse_old && target.syn == SynRole::subject)
                   ? Prominence::prominent
                   : Prominence::not_prominent;

  // most frequent entity, earliest first mention wins ties
  std::string best;
  std::size_t best_count = 0;
  int best_first = -1;
  std::map<std::string, std::size_t> doc_counts;
  for (const Mention& other : doc.mentions) ++doc_counts[other.entity_id];
  for (const auto& [id, count] : doc_counts) {
    int first = -1;
    for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
      if (doc.mentions[i].entity_id == id) {
        first = static_cast<int>(i);
        break;
      }
    }
    if (count > best_count || (count == best_count && (best_first < 0 || first < best_first))) {
      best = id;
      best_count = count;
      best_first = first;
    }
  }
  fv.glo_pro = target.entity_id == best ? Prominence::prominent : Prominence::not_prominent;

  const std::size_t corpus_count =
      counts.count(target.entity_id) ? counts.at(target.entity_id) : 0;
  fv.meta_pro = corpus_count < 50 ? MetaPro::b0_50
                : corpus_count < 150 ? MetaPro::b50_150
                : corpus_count < 290 ? MetaPro::b150_290
                                     : MetaPro::b290_inf;

  if (antecedent < 0) {
    fv.dist_ant_w = 4;
  } else {
    const double dist = target.token_index - doc.mentions[antecedent].token_index;
    int bin = 0;
    for (double t : bounds.thresholds)
      if (dist > t) ++bin;
    fv.dist_ant_w = bin;
  }

  fv.sent_1 = target_sentence == 0;

  fv.entity_type = EntityType::Other;
  fv.gender = Gender::other;
  if (auto it = meta.find(target.entity_id); it != meta.end()) {
    fv.entity_type = it->second.entity_type;
    fv.gender = it->second.gender;
  }
  return fv;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("refsel_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace refsel::test
