#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace refsel {

// Delexicalised discourse corpus. Wire format is JSON Lines, one document
// per line:
//
//   {"doc_id": "d0",
//    "tokens": [{"kind": "word", "surface": "is", "sentence_index": 0},
//               {"kind": "entity", "surface": "India",
//                "entity_id": "India", "sentence_index": 0}, ...],
//    "mentions": [{"token_index": 1, "entity_id": "India",
//                  "form": "proper_name", "syn": "object"}, ...]}
//
// The entity-metadata sidecar is a JSON array of
//   {"entity_id": ..., "entity_type": ..., "gender": ...}.

enum class TokenKind { word, entity };

enum class FormLabel { demonstrative, description, proper_name, pronoun };
inline constexpr int kNumForms = 4;

enum class SynRole { subject, object };

enum class EntityType { Person, Organisation, Location, Number, Other };
enum class Gender { male, female, other };

std::string to_string(FormLabel f);
std::string to_string(SynRole s);
std::string to_string(EntityType t);
std::string to_string(Gender g);
FormLabel form_from_string(const std::string& s);
SynRole syn_from_string(const std::string& s);
EntityType entity_type_from_string(const std::string& s);
Gender gender_from_string(const std::string& s);

struct Token {
  TokenKind kind = TokenKind::word;
  std::string surface;
  std::optional<std::string> entity_id;  // present iff kind == entity
  int sentence_index = 0;

  bool operator==(const Token&) const = default;
};

struct Mention {
  int token_index = 0;
  std::string entity_id;
  FormLabel form = FormLabel::proper_name;
  SynRole syn = SynRole::subject;

  bool operator==(const Mention&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<Mention> mentions;  // sorted by token_index, strictly increasing

  // 0 for an empty document, otherwise max sentence_index + 1.
  int sentence_count() const;

  bool operator==(const Document&) const = default;
};

// Throws ValidationError naming the doc_id and offending field.
void validate_document(const Document& doc);

struct EntityMeta {
  std::string entity_id;
  EntityType entity_type = EntityType::Other;
  Gender gender = Gender::other;

  bool operator==(const EntityMeta&) const = default;
};

using EntityMetaTable = std::map<std::string, EntityMeta>;

enum class SplitName { train, dev, test };
std::string to_string(SplitName s);

struct CorpusSplit {
  SplitName name = SplitName::train;
  std::vector<Document> documents;

  bool operator==(const CorpusSplit&) const = default;
};

// Classification schemes over the four referential forms.
enum class SchemeArity { four_way, three_way, two_way };
std::string to_string(SchemeArity a);
SchemeArity scheme_from_string(const std::string& s);

class LabelScheme {
 public:
  explicit LabelScheme(SchemeArity arity);

  SchemeArity arity() const { return arity_; }
  int num_classes() const { return num_classes_; }
  int class_of(FormLabel f) const { return mapping_[static_cast<int>(f)]; }
  const std::string& class_name(int c) const { return class_names_[c]; }

 private:
  SchemeArity arity_;
  int num_classes_;
  int mapping_[kNumForms];
  std::vector<std::string> class_names_;
};

// --- parsing / serialization -------------------------------------------

CorpusSplit parse_corpus(const std::string& path, SplitName name);
CorpusSplit parse_corpus_stream(std::istream& in, SplitName name);
void write_corpus(const CorpusSplit& split, const std::string& path);
std::string serialize_document(const Document& doc);

EntityMetaTable parse_entity_meta(const std::string& path);
void write_entity_meta(const EntityMetaTable& table, const std::string& path);

struct Corpus {
  CorpusSplit train, dev, test;
  EntityMetaTable meta;
};

// Validates doc_id uniqueness across the three splits.
Corpus load_corpus(const std::string& train_path, const std::string& dev_path,
                   const std::string& test_path, const std::string& meta_path = "");

// --- statistics ----------------------------------------------------------

struct CorpusStats {
  std::size_t documents = 0;
  double sentences_per_document = 0.0;
  std::size_t mentions = 0;
  std::size_t first_mentions = 0;
  double first_mention_fraction = 0.0;
  std::map<FormLabel, std::size_t> form_counts;
  std::map<std::string, std::size_t> entity_mention_counts;
};

CorpusStats corpus_stats(const CorpusSplit& split);

// Whole-corpus entity counts (train+dev+test unless train_only).
std::map<std::string, std::size_t> corpus_entity_counts(const Corpus& corpus,
                                                        bool train_only = false);

// --- synthesis -----------------------------------------------------------
//
// Desk-scale corpus generator. Each sentence is one clause
//   [filler] SUBJECT verb OBJECT [and OBJECT] .
// so the syntactic role of every entity slot is recoverable from the token
// stream. Gold forms follow the planted rule: pronoun iff discourse-old and
// subject, proper name iff discourse-new, description otherwise; with
// probability noise_rate the label is replaced by a uniformly drawn
// different one.

struct SynthConfig {
  int documents = 500;
  int entity_inventory = 12;
  int entities_per_document_min = 2;
  int entities_per_document_max = 5;
  int sentences_per_document_min = 2;
  int sentences_per_document_max = 4;
  int extra_fillers_max = 1;       // leading filler words per sentence
  double second_object_prob = 0.35;
  double noise_rate = 0.0;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;       // remainder goes to test
};

struct SynthOutput {
  Corpus corpus;
};

SynthOutput synthesize_corpus(const SynthConfig& config, std::uint64_t seed);

// The planted rule, exposed so tests and probes can recompute gold labels.
FormLabel planted_form_rule(bool discourse_old, SynRole syn);

}  // namespace refsel
