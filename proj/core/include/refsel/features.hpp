#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "refsel/corpus.hpp"

namespace refsel {

// Per-mention discourse features. The categorical ones double as the
// probing-task labels; the full set feeds the boosted-tree baseline.

enum class DisStat { discourse_new, discourse_old };
enum class SenStat { sentence_new, sentence_old };
enum class DistAnt { same_sentence, one_away, more_than_one, first_mention };
enum class IntRef { first_mention, previous_same, previous_different };
enum class Prominence { not_prominent, prominent };
enum class MetaPro { b0_50, b50_150, b150_290, b290_inf };

std::string to_string(DisStat v);
std::string to_string(SenStat v);
std::string to_string(DistAnt v);
std::string to_string(IntRef v);
std::string to_string(Prominence v);
std::string to_string(MetaPro v);

struct FeatureVector {
  DisStat dis_stat = DisStat::discourse_new;
  SenStat sen_stat = SenStat::sentence_new;
  SynRole syn = SynRole::subject;
  DistAnt dist_ant = DistAnt::first_mention;
  IntRef int_ref = IntRef::first_mention;
  Prominence loc_pro = Prominence::not_prominent;
  Prominence glo_pro = Prominence::not_prominent;
  MetaPro meta_pro = MetaPro::b0_50;
  int dist_ant_w = 4;        // quantile bin 0-4; first mentions take bin 4
  bool sent_1 = false;
  EntityType entity_type = EntityType::Other;
  Gender gender = Gender::other;

  bool operator==(const FeatureVector&) const = default;
};

// Word-distance quantile thresholds, fitted on the training split over
// antecedent-bearing mentions and frozen for dev/test.
struct QuantileBounds {
  std::array<double, 4> thresholds{};  // ascending
  bool fitted = false;
};

QuantileBounds fit_distance_quantiles(const CorpusSplit& train);
int bucket_distance(const QuantileBounds& bounds, double distance);

// --- per-mention extractors (m indexes doc.mentions) ----------------------

DisStat extract_dis_stat(const Document& doc, int m);
SenStat extract_sen_stat(const Document& doc, int m);
DistAnt extract_dist_ant(const Document& doc, int m);
IntRef extract_int_ref(const Document& doc, int m);
Prominence extract_loc_pro(const Document& doc, int m);
Prominence extract_glo_pro(const Document& doc, int m);
MetaPro extract_meta_pro(const std::map<std::string, std::size_t>& mention_counts,
                         const std::string& entity_id);
int extract_dist_ant_w(const Document& doc, int m, const QuantileBounds& bounds);
bool extract_sent_1(const Document& doc, int m);

// Most frequently mentioned entity of the document; ties broken toward the
// entity whose first mention occurs earliest.
std::string most_prominent_entity(const Document& doc);

struct MentionKey {
  std::string doc_id;
  int mention_index = 0;
};

struct FeatureTable {
  std::vector<MentionKey> keys;
  std::vector<FeatureVector> rows;
};

FeatureTable extract_all(const CorpusSplit& split, const EntityMetaTable& meta,
                         const std::map<std::string, std::size_t>& corpus_counts,
                         const QuantileBounds& bounds);

// Tab-separated export: doc_id, mention_index, then every field, symbolic.
void write_feature_table(const FeatureTable& table, const std::string& path);

}  // namespace refsel
