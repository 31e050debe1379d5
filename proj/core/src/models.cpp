#include "refsel/models.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

using nlohmann::json;
using nn::Tape;
using nn::Tensor2;

std::string to_string(Architecture a) { return a == Architecture::conatt ? "conatt" : "crnn"; }

Architecture architecture_from_string(const std::string& s) {
  if (s == "conatt") return Architecture::conatt;
  if (s == "crnn") return Architecture::crnn;
  throw ConfigError("unknown architecture: " + s);
}

RfsModel::RfsModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config.vocab_size < 2 || config.num_classes < 2)
    throw ConfigError("model config: vocab_size and num_classes must be at least 2");
  Rng rng(derive_seed(seed, "model.init"));
  const int e = config.embedding_dim;
  const int h = config.hidden_size;
  params_.add("embedding", nn::glorot_uniform(config.vocab_size, e, rng));
  if (config.arch == Architecture::conatt) {
    for (const char* side : {"pre", "pos"}) {
      const std::string s(side);
      nn::init_gru_params(params_, s + "_gru.fwd", e, h, rng);
      nn::init_gru_params(params_, s + "_gru.bwd", e, h, rng);
      nn::init_attention_params(params_, s + "_attention", 2 * h, config.attention_dim, rng);
    }
    params_.add("combine_w", nn::glorot_uniform(config.rep_dim, 2 * h + e + 2 * h, rng));
  } else {
    nn::init_gru_params(params_, "gru.fwd", e, h, rng);
    nn::init_gru_params(params_, "gru.bwd", e, h, rng);
    params_.add("combine_w", nn::glorot_uniform(config.rep_dim, 2 * h, rng));
  }
  params_.add("output_w", nn::glorot_uniform(config.num_classes, config.rep_dim, rng));
  if (config.use_bias) {
    params_.add("combine_b", Tensor2::zeros(1, config.rep_dim));
    params_.add("output_b", Tensor2::zeros(1, config.num_classes));
  }
}

RfsModel::RfsModel(const ModelConfig& config, nn::ParamStore params)
    : config_(config), params_(std::move(params)) {}

void RfsModel::check_input(const ModelInput& input) const {
  auto check = [&](int id) {
    if (id < 0 || id >= config_.vocab_size)
      throw ValidationError("token id out of vocabulary range: " + std::to_string(id));
  };
  for (int id : input.pre_context) check(id);
  check(input.target);
  for (int id : input.pos_context) check(id);
}

RfsModel::Forward RfsModel::forward(Tape& tape, const ModelInput& input, int gold) {
  check_input(input);
  const int h = config_.hidden_size;

  auto embed = [&](const std::vector<int>& ids) {
    std::vector<Tape::Id> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(tape.embedding_row(params_, "embedding", id));
    return out;
  };

  Tape::Id rep_input = -1;
  if (config_.arch == Architecture::conatt) {
    auto encode_context = [&](const std::vector<int>& ids, const std::string& side) -> Tape::Id {
      if (ids.empty()) return tape.constant(Tensor2::zeros(1, 2 * h));
      std::vector<Tape::Id> xs = embed(ids);
      nn::GruNodes fwd = nn::gru_param_nodes(tape, params_, side + "_gru.fwd");
      nn::GruNodes bwd = nn::gru_param_nodes(tape, params_, side + "_gru.bwd");
      std::vector<Tape::Id> states = nn::bigru_encode(tape, fwd, bwd, xs, h);
      nn::AttentionNodes att = nn::attention_param_nodes(tape, params_, side + "_attention");
      return nn::self_attention(tape, att, states).context;
    };
    const Tape::Id c_pre = encode_context(input.pre_context, "pre");
    const Tape::Id x_target = tape.embedding_row(params_, "embedding", input.target);
    const Tape::Id c_pos = encode_context(input.pos_context, "pos");
    const Tape::Id parts[3] = {c_pre, x_target, c_pos};
    rep_input = tape.concat_cols(parts);
  } else {
    std::vector<int> ids = input.pre_context;
    ids.push_back(input.target);
    ids.insert(ids.end(), input.pos_context.begin(), input.pos_context.end());
    std::vector<Tape::Id> xs = embed(ids);
    nn::GruNodes fwd = nn::gru_param_nodes(tape, params_, "gru.fwd");
    nn::GruNodes bwd = nn::gru_param_nodes(tape, params_, "gru.bwd");
    std::vector<Tape::Id> states = nn::bigru_encode(tape, fwd, bwd, xs, h);
    rep_input = states[input.pre_context.size()];  // target position
  }

  Forward out;
  const Tape::Id combine_w = tape.param(params_, "combine_w");
  const Tape::Id combine_b =
      config_.use_bias ? tape.param(params_, "combine_b") : Tape::Id{-1};
  out.rep = nn::dense_relu(tape, combine_w, rep_input, combine_b);
  const Tape::Id output_w = tape.param(params_, "output_w");
  out.logits = tape.matmul(out.rep, output_w, false, true);
  if (config_.use_bias) out.logits = tape.add(out.logits, tape.param(params_, "output_b"));
  if (gold >= 0) out.loss = tape.softmax_xent(out.logits, gold);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> RfsModel::infer(const ModelInput& input) {
  Tape tape;
  Forward f = forward(tape, input, 0);
  const Tensor2& rep = tape.value(f.rep);
  const Tensor2& probs = tape.probabilities(f.loss);
  return {rep.data, probs.data};
}

ModelInput make_model_input(const Document& doc, int mention_index, const Vocabulary& vocab,
                            int max_context) {
  if (mention_index < 0 || mention_index >= static_cast<int>(doc.mentions.size()))
    throw ValidationError("doc " + doc.doc_id + ": mention index out of range");
  const int t = doc.mentions[mention_index].token_index;
  ModelInput input;
  input.target = vocab.id(doc.tokens[t].surface);
  const int pre_begin = std::max(0, t - max_context);
  for (int i = pre_begin; i < t; ++i) input.pre_context.push_back(vocab.id(doc.tokens[i].surface));
  const int pos_end = std::min<int>(doc.tokens.size(), t + 1 + max_context);
  for (int i = t + 1; i < pos_end; ++i)
    input.pos_context.push_back(vocab.id(doc.tokens[i].surface));
  return input;
}

std::vector<ModelInput> build_inputs(const CorpusSplit& split, const Vocabulary& vocab,
                                     int max_context) {
  std::vector<ModelInput> inputs;
  for (const Document& doc : split.documents)
    for (std::size_t m = 0; m < doc.mentions.size(); ++m)
      inputs.push_back(make_model_input(doc, static_cast<int>(m), vocab, max_context));
  return inputs;
}

std::vector<int> gold_classes(const CorpusSplit& split, const LabelScheme& scheme) {
  std::vector<int> gold;
  for (const Document& doc : split.documents)
    for (const Mention& m : doc.mentions) gold.push_back(scheme.class_of(m.form));
  return gold;
}

std::string config_hash(const ModelConfig& config, SchemeArity scheme) {
  std::ostringstream s;
  s << "arch=" << to_string(config.arch) << ";scheme=" << to_string(scheme)
    << ";vocab=" << config.vocab_size << ";classes=" << config.num_classes
    << ";emb=" << config.embedding_dim << ";hidden=" << config.hidden_size
    << ";att=" << config.attention_dim << ";rep=" << config.rep_dim
    << ";ctx=" << config.max_context << ";bias=" << (config.use_bias ? 1 : 0);
  std::ostringstream hex;
  hex << std::hex << fnv1a64(s.str());
  return hex.str();
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  json j;
  j["format"] = "refsel-checkpoint";
  j["version"] = 1;
  j["architecture"] = to_string(model.config.arch);
  j["scheme"] = to_string(model.scheme);
  j["config"] = {{"vocab_size", model.config.vocab_size},
                 {"num_classes", model.config.num_classes},
                 {"embedding_dim", model.config.embedding_dim},
                 {"hidden_size", model.config.hidden_size},
                 {"attention_dim", model.config.attention_dim},
                 {"rep_dim", model.config.rep_dim},
                 {"max_context", model.config.max_context},
                 {"use_bias", model.config.use_bias}};
  j["config_hash"] = config_hash(model.config, model.scheme);
  j["vocabulary"] = model.vocab.tokens();
  j["params"] = json::parse(nn::params_to_json_string(model.params));
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "refsel-checkpoint") throw ParseError("not a refsel checkpoint");
  if (j.value("version", 0) != 1) throw ParseError("unsupported checkpoint version");
  TrainedModel model;
  model.config.arch = architecture_from_string(j.at("architecture").get<std::string>());
  model.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  const json& jc = j.at("config");
  model.config.vocab_size = jc.at("vocab_size").get<int>();
  model.config.num_classes = jc.at("num_classes").get<int>();
  model.config.embedding_dim = jc.at("embedding_dim").get<int>();
  model.config.hidden_size = jc.at("hidden_size").get<int>();
  model.config.attention_dim = jc.at("attention_dim").get<int>();
  model.config.rep_dim = jc.at("rep_dim").get<int>();
  model.config.max_context = jc.at("max_context").get<int>();
  model.config.use_bias = jc.at("use_bias").get<bool>();
  model.vocab = Vocabulary::from_tokens(j.at("vocabulary").get<std::vector<std::string>>());
  model.params = nn::params_from_json_string(j.at("params").dump());
  return model;
}

EmbeddingLoadReport load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                                               Tensor2& embedding) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file: " + path);
  if (embedding.rows != vocab.size())
    throw ValidationError("embedding table rows do not match vocabulary size");
  const int dim = embedding.cols;
  EmbeddingLoadReport report;
  std::set<std::string> matched_tokens;
  std::set<std::string> seen;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    if (token.empty()) throw ParseError("missing token", line_number);
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (!row.eof()) throw ParseError("non-numeric vector component", line_number);
    if (static_cast<int>(values.size()) != dim)
      throw ParseError("expected " + std::to_string(dim) + " components, got " +
                           std::to_string(values.size()),
                       line_number);
    ++report.file_vectors;
    if (!seen.insert(token).second) report.duplicate_tokens.push_back(token);
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    if (id == Vocabulary::kPadId || id == Vocabulary::kUnkId) continue;
    std::copy(values.begin(), values.end(), embedding.row_ptr(id));
    matched_tokens.insert(token);  // last occurrence wins
  }
  report.matched = matched_tokens.size();
  report.coverage = vocab.content_size() == 0
                        ? 0.0
                        : static_cast<double>(report.matched) / vocab.content_size();
  return report;
}

std::vector<std::vector<double>> embed_representations(const TrainedModel& model,
                                                       const CorpusSplit& split) {
  RfsModel rfs = model.instantiate();
  std::vector<std::vector<double>> rows;
  for (const Document& doc : split.documents) {
    for (std::size_t m = 0; m < doc.mentions.size(); ++m) {
      const ModelInput input =
          make_model_input(doc, static_cast<int>(m), model.vocab, model.config.max_context);
      rows.push_back(rfs.infer(input).first);
    }
  }
  return rows;
}

}  // namespace refsel
