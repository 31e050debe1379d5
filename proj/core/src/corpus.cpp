#include "refsel/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

using nlohmann::json;

std::string to_string(FormLabel f) {
  switch (f) {
    case FormLabel::demonstrative: return "demonstrative";
    case FormLabel::description: return "description";
    case FormLabel::proper_name: return "proper_name";
    case FormLabel::pronoun: return "pronoun";
  }
  return "?";
}

std::string to_string(SynRole s) {
  return s == SynRole::subject ? "subject" : "object";
}

std::string to_string(EntityType t) {
  switch (t) {
    case EntityType::Person: return "Person";
    case EntityType::Organisation: return "Organisation";
    case EntityType::Location: return "Location";
    case EntityType::Number: return "Number";
    case EntityType::Other: return "Other";
  }
  return "?";
}

std::string to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::other: return "other";
  }
  return "?";
}

FormLabel form_from_string(const std::string& s) {
  if (s == "demonstrative") return FormLabel::demonstrative;
  if (s == "description") return FormLabel::description;
  if (s == "proper_name") return FormLabel::proper_name;
  if (s == "pronoun") return FormLabel::pronoun;
  throw ValidationError("unknown form label: " + s);
}

SynRole syn_from_string(const std::string& s) {
  if (s == "subject") return SynRole::subject;
  if (s == "object") return SynRole::object;
  throw ValidationError("unknown syntactic role: " + s);
}

EntityType entity_type_from_string(const std::string& s) {
  if (s == "Person") return EntityType::Person;
  if (s == "Organisation") return EntityType::Organisation;
  if (s == "Location") return EntityType::Location;
  if (s == "Number") return EntityType::Number;
  if (s == "Other") return EntityType::Other;
  throw ValidationError("unknown entity type: " + s);
}

Gender gender_from_string(const std::string& s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  if (s == "other") return Gender::other;
  throw ValidationError("unknown gender: " + s);
}

std::string to_string(SplitName s) {
  switch (s) {
    case SplitName::train: return "train";
    case SplitName::dev: return "dev";
    case SplitName::test: return "test";
  }
  return "?";
}

std::string to_string(SchemeArity a) {
  switch (a) {
    case SchemeArity::four_way: return "4-way";
    case SchemeArity::three_way: return "3-way";
    case SchemeArity::two_way: return "2-way";
  }
  return "?";
}

SchemeArity scheme_from_string(const std::string& s) {
  if (s == "4-way" || s == "4way" || s == "4") return SchemeArity::four_way;
  if (s == "3-way" || s == "3way" || s == "3") return SchemeArity::three_way;
  if (s == "2-way" || s == "2way" || s == "2") return SchemeArity::two_way;
  throw ConfigError("unknown label scheme: " + s);
}

LabelScheme::LabelScheme(SchemeArity arity) : arity_(arity) {
  switch (arity) {
    case SchemeArity::four_way:
      num_classes_ = 4;
      mapping_[static_cast<int>(FormLabel::demonstrative)] = 0;
      mapping_[static_cast<int>(FormLabel::description)] = 1;
      mapping_[static_cast<int>(FormLabel::proper_name)] = 2;
      mapping_[static_cast<int>(FormLabel::pronoun)] = 3;
      class_names_ = {"demonstrative", "description", "proper_name", "pronoun"};
      break;
    case SchemeArity::three_way:
      // demonstratives and descriptions share a class
      num_classes_ = 3;
      mapping_[static_cast<int>(FormLabel::demonstrative)] = 0;
      mapping_[static_cast<int>(FormLabel::description)] = 0;
      mapping_[static_cast<int>(FormLabel::proper_name)] = 1;
      mapping_[static_cast<int>(FormLabel::pronoun)] = 2;
      class_names_ = {"description", "proper_name", "pronoun"};
      break;
    case SchemeArity::two_way:
      num_classes_ = 2;
      mapping_[static_cast<int>(FormLabel::demonstrative)] = 0;
      mapping_[static_cast<int>(FormLabel::description)] = 0;
      mapping_[static_cast<int>(FormLabel::proper_name)] = 0;
      mapping_[static_cast<int>(FormLabel::pronoun)] = 1;
      class_names_ = {"non_pronominal", "pronominal"};
      break;
  }
}

int Document::sentence_count() const {
  if (tokens.empty()) return 0;
  return tokens.back().sentence_index + 1;
}

void validate_document(const Document& doc) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("doc " + doc.doc_id + ": " + what);
  };
  if (doc.doc_id.empty()) throw ValidationError("empty doc_id");
  int prev_sentence = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.surface.empty()) fail("token " + std::to_string(i) + ": empty surface");
    if (t.surface.find_first_of(" \t\n\r") != std::string::npos)
      fail("token " + std::to_string(i) + ": surface contains whitespace");
    if ((t.kind == TokenKind::entity) != t.entity_id.has_value())
      fail("token " + std::to_string(i) + ": entity_id present iff kind=entity");
    if (i == 0 && t.sentence_index != 0) fail("sentence_index must start at 0");
    if (t.sentence_index < (i == 0 ? 0 : prev_sentence))
      fail("token " + std::to_string(i) + ": sentence_index decreases");
    prev_sentence = t.sentence_index;
  }
  int prev_token_index = -1;
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const Mention& m = doc.mentions[i];
    if (m.token_index < 0 || m.token_index >= static_cast<int>(doc.tokens.size()))
      fail("mention " + std::to_string(i) + ": token_index out of range");
    const Token& t = doc.tokens[m.token_index];
    if (t.kind != TokenKind::entity)
      fail("mention " + std::to_string(i) + ": mention on non-entity token");
    if (*t.entity_id != m.entity_id)
      fail("mention " + std::to_string(i) + ": entity_id mismatch with token");
    if (m.token_index <= prev_token_index)
      fail("mention " + std::to_string(i) + ": mentions not strictly increasing by token_index");
    prev_token_index = m.token_index;
  }
}

namespace {

Document document_from_json(const json& j) {
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  for (const auto& jt : j.at("tokens")) {
    Token t;
    const std::string kind = jt.at("kind").get<std::string>();
    if (kind == "word") {
      t.kind = TokenKind::word;
    } else if (kind == "entity") {
      t.kind = TokenKind::entity;
    } else {
      throw ValidationError("doc " + doc.doc_id + ": unknown token kind: " + kind);
    }
    t.surface = jt.at("surface").get<std::string>();
    if (jt.contains("entity_id")) t.entity_id = jt.at("entity_id").get<std::string>();
    t.sentence_index = jt.at("sentence_index").get<int>();
    if (t.sentence_index < 0)
      throw ValidationError("doc " + doc.doc_id + ": negative sentence_index");
    doc.tokens.push_back(std::move(t));
  }
  for (const auto& jm : j.at("mentions")) {
    Mention m;
    m.token_index = jm.at("token_index").get<int>();
    m.entity_id = jm.at("entity_id").get<std::string>();
    m.form = form_from_string(jm.at("form").get<std::string>());
    m.syn = syn_from_string(jm.at("syn").get<std::string>());
    doc.mentions.push_back(std::move(m));
  }
  validate_document(doc);
  return doc;
}

json document_to_json(const Document& doc) {
  json tokens = json::array();
  for (const Token& t : doc.tokens) {
    json jt;
    jt["kind"] = t.kind == TokenKind::word ? "word" : "entity";
    jt["surface"] = t.surface;
    if (t.entity_id) jt["entity_id"] = *t.entity_id;
    jt["sentence_index"] = t.sentence_index;
    tokens.push_back(std::move(jt));
  }
  json mentions = json::array();
  for (const Mention& m : doc.mentions) {
    mentions.push_back({{"token_index", m.token_index},
                        {"entity_id", m.entity_id},
                        {"form", to_string(m.form)},
                        {"syn", to_string(m.syn)}});
  }
  return {{"doc_id", doc.doc_id}, {"tokens", std::move(tokens)}, {"mentions", std::move(mentions)}};
}

}  // namespace

std::string serialize_document(const Document& doc) { return document_to_json(doc).dump(); }

CorpusSplit parse_corpus_stream(std::istream& in, SplitName name) {
  CorpusSplit split;
  split.name = name;
  std::set<std::string> seen_ids;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_number);
    }
    Document doc;
    try {
      doc = document_from_json(j);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_number);
    }
    if (!seen_ids.insert(doc.doc_id).second)
      throw ParseError("duplicate doc_id: " + doc.doc_id, line_number);
    split.documents.push_back(std::move(doc));
  }
  return split;
}

CorpusSplit parse_corpus(const std::string& path, SplitName name) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file: " + path);
  return parse_corpus_stream(in, name);
}

void write_corpus(const CorpusSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write corpus file: " + path);
  for (const Document& doc : split.documents) out << serialize_document(doc) << "\n";
}

EntityMetaTable parse_entity_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metadata file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metadata: ") + e.what());
  }
  EntityMetaTable table;
  for (const auto& je : j) {
    EntityMeta m;
    m.entity_id = je.at("entity_id").get<std::string>();
    m.entity_type = entity_type_from_string(je.at("entity_type").get<std::string>());
    m.gender = gender_from_string(je.at("gender").get<std::string>());
    if (!table.emplace(m.entity_id, m).second)
      throw ValidationError("duplicate entity_id in metadata: " + m.entity_id);
  }
  return table;
}

void write_entity_meta(const EntityMetaTable& table, const std::string& path) {
  json arr = json::array();
  for (const auto& [id, m] : table) {
    arr.push_back({{"entity_id", id},
                   {"entity_type", to_string(m.entity_type)},
                   {"gender", to_string(m.gender)}});
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metadata file: " + path);
  out << arr.dump(2) << "\n";
}

Corpus load_corpus(const std::string& train_path, const std::string& dev_path,
                   const std::string& test_path, const std::string& meta_path) {
  Corpus corpus;
  corpus.train = parse_corpus(train_path, SplitName::train);
  corpus.dev = parse_corpus(dev_path, SplitName::dev);
  corpus.test = parse_corpus(test_path, SplitName::test);
  if (!meta_path.empty()) corpus.meta = parse_entity_meta(meta_path);
  std::set<std::string> ids;
  for (const CorpusSplit* s : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const Document& d : s->documents) {
      if (!ids.insert(d.doc_id).second)
        throw ValidationError("duplicate doc_id across splits: " + d.doc_id);
    }
  }
  return corpus;
}

CorpusStats corpus_stats(const CorpusSplit& split) {
  if (split.documents.empty()) throw ValidationError("empty split");
  CorpusStats stats;
  stats.documents = split.documents.size();
  std::size_t sentences = 0;
  for (const Document& doc : split.documents) {
    sentences += doc.sentence_count();
    std::set<std::string> seen;
    for (const Mention& m : doc.mentions) {
      ++stats.mentions;
      ++stats.form_counts[m.form];
      ++stats.entity_mention_counts[m.entity_id];
      if (seen.insert(m.entity_id).second) ++stats.first_mentions;
    }
  }
  stats.sentences_per_document = static_cast<double>(sentences) / stats.documents;
  stats.first_mention_fraction =
      stats.mentions == 0 ? 0.0 : static_cast<double>(stats.first_mentions) / stats.mentions;
  return stats;
}

std::map<std::string, std::size_t> corpus_entity_counts(const Corpus& corpus, bool train_only) {
  std::map<std::string, std::size_t> counts;
  auto add = [&](const CorpusSplit& s) {
    for (const Document& d : s.documents)
      for (const Mention& m : d.mentions) ++counts[m.entity_id];
  };
  add(corpus.train);
  if (!train_only) {
    add(corpus.dev);
    add(corpus.test);
  }
  return counts;
}

// --- synthesis -----------------------------------------------------------

FormLabel planted_form_rule(bool discourse_old, SynRole syn) {
  if (!discourse_old) return FormLabel::proper_name;
  if (syn == SynRole::subject) return FormLabel::pronoun;
  return FormLabel::description;
}

namespace {

const std::vector<std::string> kVerbs = {"praises", "visits", "rules",  "likes",
                                         "meets",   "joins",  "leads",  "helps"};
const std::vector<std::string> kFillers = {"then", "also", "later", "meanwhile", "again"};

void append_entity(Document& doc, const std::string& entity_id, int sentence, SynRole syn,
                   bool discourse_old, double noise_rate, Rng& rng) {
  Token t;
  t.kind = TokenKind::entity;
  t.surface = entity_id;
  t.entity_id = entity_id;
  t.sentence_index = sentence;
  doc.tokens.push_back(t);

  Mention m;
  m.token_index = static_cast<int>(doc.tokens.size()) - 1;
  m.entity_id = entity_id;
  m.syn = syn;
  m.form = planted_form_rule(discourse_old, syn);
  if (noise_rate > 0.0 && rng.bernoulli(noise_rate)) {
    // replace by a uniformly drawn *different* label so the violation
    // frequency equals the noise rate
    int shift = 1 + static_cast<int>(rng.uniform_int(kNumForms - 1));
    m.form = static_cast<FormLabel>((static_cast<int>(m.form) + shift) % kNumForms);
  }
  doc.mentions.push_back(m);
}

void append_word(Document& doc, const std::string& surface, int sentence) {
  Token t;
  t.kind = TokenKind::word;
  t.surface = surface;
  t.sentence_index = sentence;
  doc.tokens.push_back(t);
}

}  // namespace

SynthOutput synthesize_corpus(const SynthConfig& config, std::uint64_t seed) {
  if (config.documents <= 0) throw ConfigError("synth: documents must be positive");
  if (config.entity_inventory <= 0) throw ConfigError("synth: entity_inventory must be positive");
  if (config.noise_rate < 0.0 || config.noise_rate > 1.0)
    throw ConfigError("synth: noise_rate outside [0,1]");
  if (config.sentences_per_document_min <= 0 ||
      config.sentences_per_document_max < config.sentences_per_document_min)
    throw ConfigError("synth: invalid sentences_per_document range");
  if (config.entities_per_document_min <= 0 ||
      config.entities_per_document_max < config.entities_per_document_min)
    throw ConfigError("synth: invalid entities_per_document range");
  if (config.train_fraction <= 0.0 || config.dev_fraction < 0.0 ||
      config.train_fraction + config.dev_fraction >= 1.0)
    throw ConfigError("synth: invalid split fractions");

  std::vector<std::string> inventory;
  EntityMetaTable meta;
  for (int i = 0; i < config.entity_inventory; ++i) {
    std::string id = "Entity_" + std::to_string(i);
    inventory.push_back(id);
    EntityMeta m;
    m.entity_id = id;
    m.entity_type = static_cast<EntityType>(i % 5);
    m.gender = static_cast<Gender>(i % 3);
    meta.emplace(id, m);
  }

  Rng rng(derive_seed(seed, "corpus.synth"));
  std::vector<Document> docs;
  docs.reserve(config.documents);

  for (int d = 0; d < config.documents; ++d) {
    Document doc;
    doc.doc_id = "synth_" + std::to_string(d);

    int active = config.entities_per_document_min +
                 static_cast<int>(rng.uniform_int(config.entities_per_document_max -
                                                  config.entities_per_document_min + 1));
    std::vector<int> pick = rng.permutation(config.entity_inventory);
    pick.resize(std::min<std::size_t>(active, pick.size()));

    std::set<std::string> introduced;
    auto pick_entity = [&]() -> const std::string& {
      return inventory[pick[rng.uniform_int(pick.size())]];
    };
    auto place = [&](int sentence, SynRole syn) {
      const std::string& id = pick_entity();
      bool old = introduced.count(id) > 0;
      append_entity(doc, id, sentence, syn, old, config.noise_rate, rng);
      introduced.insert(id);
    };

    int sentences = config.sentences_per_document_min +
                    static_cast<int>(rng.uniform_int(config.sentences_per_document_max -
                                                     config.sentences_per_document_min + 1));
    for (int s = 0; s < sentences; ++s) {
      int fillers = config.extra_fillers_max > 0
                        ? static_cast<int>(rng.uniform_int(config.extra_fillers_max + 1))
                        : 0;
      for (int f = 0; f < fillers; ++f)
        append_word(doc, kFillers[rng.uniform_int(kFillers.size())], s);
      place(s, SynRole::subject);
      append_word(doc, kVerbs[rng.uniform_int(kVerbs.size())], s);
      place(s, SynRole::object);
      if (rng.bernoulli(config.second_object_prob)) {
        append_word(doc, "and", s);
        place(s, SynRole::object);
      }
      append_word(doc, ".", s);
    }
    validate_document(doc);
    docs.push_back(std::move(doc));
  }

  const std::size_t n = docs.size();
  const auto n_train = static_cast<std::size_t>(config.train_fraction * n);
  const auto n_dev = static_cast<std::size_t>(config.dev_fraction * n);

  SynthOutput out;
  out.corpus.meta = std::move(meta);
  out.corpus.train.name = SplitName::train;
  out.corpus.dev.name = SplitName::dev;
  out.corpus.test.name = SplitName::test;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      out.corpus.train.documents.push_back(std::move(docs[i]));
    else if (i < n_train + n_dev)
      out.corpus.dev.documents.push_back(std::move(docs[i]));
    else
      out.corpus.test.documents.push_back(std::move(docs[i]));
  }
  return out;
}

}  // namespace refsel
