#include "refsel/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "refsel/errors.hpp"

namespace refsel {

std::string to_string(DisStat v) {
  return v == DisStat::discourse_new ? "discourse_new" : "discourse_old";
}
std::string to_string(SenStat v) {
  return v == SenStat::sentence_new ? "sentence_new" : "sentence_old";
}
std::string to_string(DistAnt v) {
  switch (v) {
    case DistAnt::same_sentence: return "same_sentence";
    case DistAnt::one_away: return "one_away";
    case DistAnt::more_than_one: return "more_than_one";
    case DistAnt::first_mention: return "first_mention";
  }
  return "?";
}
std::string to_string(IntRef v) {
  switch (v) {
    case IntRef::first_mention: return "first_mention";
    case IntRef::previous_same: return "previous_same";
    case IntRef::previous_different: return "previous_different";
  }
  return "?";
}
std::string to_string(Prominence v) {
  return v == Prominence::prominent ? "prominent" : "not_prominent";
}
std::string to_string(MetaPro v) {
  switch (v) {
    case MetaPro::b0_50: return "b0_50";
    case MetaPro::b50_150: return "b50_150";
    case MetaPro::b150_290: return "b150_290";
    case MetaPro::b290_inf: return "b290_inf";
  }
  return "?";
}

namespace {

void check_mention_index(const Document& doc, int m) {
  if (m < 0 || m >= static_cast<int>(doc.mentions.size()))
    throw ValidationError("doc " + doc.doc_id + ": mention index out of range");
}

// Nearest antecedent: the prior mention of the same entity with the largest
// token_index. Returns -1 when the mention is a first mention.
int antecedent_index(const Document& doc, int m) {
  const Mention& target = doc.mentions[m];
  for (int i = m - 1; i >= 0; --i)
    if (doc.mentions[i].entity_id == target.entity_id) return i;
  return -1;
}

int mention_sentence(const Document& doc, const Mention& m) {
  return doc.tokens[m.token_index].sentence_index;
}

}  // namespace

DisStat extract_dis_stat(const Document& doc, int m) {
  check_mention_index(doc, m);
  return antecedent_index(doc, m) >= 0 ? DisStat::discourse_old : DisStat::discourse_new;
}

SenStat extract_sen_stat(const Document& doc, int m) {
  check_mention_index(doc, m);
  const Mention& target = doc.mentions[m];
  const int sentence = mention_sentence(doc, target);
  for (int i = m - 1; i >= 0; --i) {
    const Mention& prior = doc.mentions[i];
    if (prior.entity_id == target.entity_id && mention_sentence(doc, prior) == sentence)
      return SenStat::sentence_old;
  }
  return SenStat::sentence_new;
}

DistAnt extract_dist_ant(const Document& doc, int m) {
  check_mention_index(doc, m);
  const int a = antecedent_index(doc, m);
  if (a < 0) return DistAnt::first_mention;
  const int d = mention_sentence(doc, doc.mentions[m]) - mention_sentence(doc, doc.mentions[a]);
  if (d == 0) return DistAnt::same_sentence;
  if (d == 1) return DistAnt::one_away;
  return DistAnt::more_than_one;
}

IntRef extract_int_ref(const Document& doc, int m) {
  check_mention_index(doc, m);
  if (antecedent_index(doc, m) < 0) return IntRef::first_mention;
  const Mention& previous = doc.mentions[m - 1];
  return previous.entity_id == doc.mentions[m].entity_id ? IntRef::previous_same
                                                         : IntRef::previous_different;
}

Prominence extract_loc_pro(const Document& doc, int m) {
  check_mention_index(doc, m);
  const bool old = extract_dis_stat(doc, m) == DisStat::discourse_old;
  const bool subject = doc.mentions[m].syn == SynRole::subject;
  return old && subject ? Prominence::prominent : Prominence::not_prominent;
}

std::string most_prominent_entity(const Document& doc) {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, int> first_seen;
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const Mention& m = doc.mentions[i];
    ++counts[m.entity_id];
    if (!first_seen.count(m.entity_id)) first_seen[m.entity_id] = static_cast<int>(i);
  }
  std::string best;
  std::size_t best_count = 0;
  int best_first = std::numeric_limits<int>::max();
  for (const auto& [id, count] : counts) {
    const int first = first_seen[id];
    if (count > best_count || (count == best_count && first < best_first)) {
      best = id;
      best_count = count;
      best_first = first;
    }
  }
  return best;
}

Prominence extract_glo_pro(const Document& doc, int m) {
  check_mention_index(doc, m);
  return doc.mentions[m].entity_id == most_prominent_entity(doc) ? Prominence::prominent
                                                                 : Prominence::not_prominent;
}

MetaPro extract_meta_pro(const std::map<std::string, std::size_t>& mention_counts,
                         const std::string& entity_id) {
  const auto it = mention_counts.find(entity_id);
  const std::size_t count = it == mention_counts.end() ? 0 : it->second;
  if (count < 50) return MetaPro::b0_50;
  if (count < 150) return MetaPro::b50_150;
  if (count < 290) return MetaPro::b150_290;
  return MetaPro::b290_inf;
}

QuantileBounds fit_distance_quantiles(const CorpusSplit& train) {
  std::vector<double> distances;
  for (const Document& doc : train.documents) {
    for (std::size_t m = 0; m < doc.mentions.size(); ++m) {
      const int a = antecedent_index(doc, static_cast<int>(m));
      if (a >= 0)
        distances.push_back(doc.mentions[m].token_index - doc.mentions[a].token_index);
    }
  }
  if (distances.empty())
    throw ValidationError("cannot fit distance quantiles: no antecedent-bearing mentions");
  std::sort(distances.begin(), distances.end());
  QuantileBounds bounds;
  const std::size_t n = distances.size();
  for (std::size_t q = 0; q < 4; ++q) {
    // nearest-rank percentile at 20/40/60/80, exact integer arithmetic
    std::size_t rank = ((q + 1) * n + 4) / 5;
    if (rank == 0) rank = 1;
    bounds.thresholds[q] = distances[rank - 1];
  }
  bounds.fitted = true;
  return bounds;
}

int bucket_distance(const QuantileBounds& bounds, double distance) {
  if (!bounds.fitted) throw ValidationError("distance quantile bounds not fitted");
  int bin = 0;
  for (double t : bounds.thresholds)
    if (distance > t) ++bin;
  return bin;
}

int extract_dist_ant_w(const Document& doc, int m, const QuantileBounds& bounds) {
  check_mention_index(doc, m);
  if (!bounds.fitted) throw ValidationError("distance quantile bounds not fitted");
  const int a = antecedent_index(doc, m);
  if (a < 0) return 4;  // reserved bin for first mentions
  return bucket_distance(bounds, doc.mentions[m].token_index - doc.mentions[a].token_index);
}

bool extract_sent_1(const Document& doc, int m) {
  check_mention_index(doc, m);
  return mention_sentence(doc, doc.mentions[m]) == 0;
}

FeatureTable extract_all(const CorpusSplit& split, const EntityMetaTable& meta,
                         const std::map<std::string, std::size_t>& corpus_counts,
                         const QuantileBounds& bounds) {
  FeatureTable table;
  for (const Document& doc : split.documents) {
    const std::string prominent = most_prominent_entity(doc);
    for (std::size_t m = 0; m < doc.mentions.size(); ++m) {
      const Mention& mention = doc.mentions[m];
      const int mi = static_cast<int>(m);
      FeatureVector fv;
      fv.dis_stat = extract_dis_stat(doc, mi);
      fv.sen_stat = extract_sen_stat(doc, mi);
      fv.syn = mention.syn;
      fv.dist_ant = extract_dist_ant(doc, mi);
      fv.int_ref = extract_int_ref(doc, mi);
      fv.loc_pro = extract_loc_pro(doc, mi);
      fv.glo_pro = mention.entity_id == prominent ? Prominence::prominent
                                                  : Prominence::not_prominent;
      fv.meta_pro = extract_meta_pro(corpus_counts, mention.entity_id);
      fv.dist_ant_w = extract_dist_ant_w(doc, mi, bounds);
      fv.sent_1 = extract_sent_1(doc, mi);
      const auto it = meta.find(mention.entity_id);
      if (it != meta.end()) {
        fv.entity_type = it->second.entity_type;
        fv.gender = it->second.gender;
      }
      table.keys.push_back({doc.doc_id, mi});
      table.rows.push_back(fv);
    }
  }
  return table;
}

void write_feature_table(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write feature table: " + path);
  out << "doc_id\tmention_index\tdis_stat\tsen_stat\tsyn\tdist_ant\tint_ref\tloc_pro\t"
         "glo_pro\tmeta_pro\tdist_ant_w\tsent_1\tentity_type\tgender\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const FeatureVector& fv = table.rows[i];
    out << table.keys[i].doc_id << '\t' << table.keys[i].mention_index << '\t'
        << to_string(fv.dis_stat) << '\t' << to_string(fv.sen_stat) << '\t'
        << to_string(fv.syn) << '\t' << to_string(fv.dist_ant) << '\t'
        << to_string(fv.int_ref) << '\t' << to_string(fv.loc_pro) << '\t'
        << to_string(fv.glo_pro) << '\t' << to_string(fv.meta_pro) << '\t'
        << fv.dist_ant_w << '\t' << (fv.sent_1 ? "true" : "false") << '\t'
        << to_string(fv.entity_type) << '\t' << to_string(fv.gender) << '\n';
  }
}

}  // namespace refsel
