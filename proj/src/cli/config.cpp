// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "ctcf/cli.hpp"
#include "ctcf/error.hpp"
#include "ctcf/io.hpp"

namespace ctcf {

using ojson = nlohmann::ordered_json;

PhantomSpec RunConfig::default_demo_phantom() {
  PhantomSpec spec;
  spec.rim = RimSpec{};
  return spec;
}

SearchConfig RunConfig::scan_search_defaults() {
  SearchConfig s;
  s.target_fraction = 0.0;
  return s;
}

void RunConfig::validate() const {
  phantom.validate();
  train_ae.validate();
  train_scorer.validate();
  search.validate();
  scan_search.validate();
  scorer_kind_from_string(scorer.kind);
  if (autoencoder.latent_dim == 0 || autoencoder.hidden == 0)
    fail(ErrorKind::InvalidArgument, "autoencoder.latent_dim and autoencoder.hidden must be positive");
  if (chunk.scan_size == 0) fail(ErrorKind::InvalidArgument, "chunk.scan_size must be positive");
  if (evaluate.chunk_size == 0) fail(ErrorKind::InvalidArgument, "evaluate.chunk_size must be positive");
  if (evaluate.bins < 2) fail(ErrorKind::InvalidArgument, "evaluate.bins must be at least 2");
  if (dataset.jitter.rim_min_len == 0 || dataset.jitter.rim_min_len > dataset.jitter.rim_max_len)
    fail(ErrorKind::InvalidArgument, "dataset.jitter: need 1 <= rim_min_len <= rim_max_len");
}

namespace {

ojson vec3(const Vec3& v) { return ojson::array({v.z, v.y, v.x}); }

ojson train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate}, {"seed", t.seed}};
}

ojson search_json(const SearchConfig& s) {
  return {{"lambda0", s.lambda0},
          {"growth", s.growth},
          {"max_steps", s.max_steps},
          {"pixel_budget", s.pixel_budget},
          {"target_fraction", s.target_fraction}};
}

ojson rim_json(const RimSpec& r) {
  return {{"slice_begin", r.slice_begin}, {"slice_end", r.slice_end},   {"angle_center", r.angle_center},
          {"angle_extent", r.angle_extent}, {"thickness", r.thickness}, {"intensity", r.intensity}};
}

const char* type_name(const nlohmann::json& j) {
  if (j.is_number_unsigned()) return "non-negative integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

bool compatible(const ojson& schema, const nlohmann::json& value) {
  if (schema.is_number_unsigned()) return value.is_number_unsigned();
  if (schema.is_number()) return value.is_number();
  if (schema.is_boolean()) return value.is_boolean();
  if (schema.is_string()) return value.is_string();
  if (schema.is_array()) return value.is_array();
  return false;
}

// Copies `patch` into `target`, which starts as the defaults. `schema` is the
// set of allowed keys; it differs from `target` only where a default is null.
void overlay(ojson& target, const ojson& schema, const nlohmann::json& patch, const std::string& path) {
  if (!patch.is_object()) fail(ErrorKind::InvalidArgument, "config" + path + ": expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string where = path + "." + key;
    if (!schema.contains(key)) fail(ErrorKind::InvalidArgument, "config: unknown key '" + where.substr(1) + "'");
    const ojson& s = schema[key];
    if (s.is_object()) {
      if (value.is_null() && key == "rim") {
        target[key] = nullptr;
        continue;
      }
      if (!target[key].is_object()) target[key] = s;
      overlay(target[key], s, value, where);
      continue;
    }
    if (!compatible(s, value))
      fail(ErrorKind::InvalidArgument, "config: '" + where.substr(1) + "' expects " + type_name(s) + ", got " +
                                           type_name(value));
    if (s.is_array()) {
      for (const auto& item : value) {
        if (!s.empty() && !compatible(s.front(), item))
          fail(ErrorKind::InvalidArgument, "config: '" + where.substr(1) + "' elements must be " + type_name(s.front()));
      }
    }
    target[key] = value;
  }
}

Vec3 get_vec3(const ojson& j, const char* name) {
  if (j.size() != 3) fail(ErrorKind::InvalidArgument, std::string("config: '") + name + "' needs [z, y, x]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

TrainConfig get_train(const ojson& j) {
  return {j["epochs"].get<std::size_t>(), j["batch_size"].get<std::size_t>(), j["learning_rate"].get<double>(),
          j["seed"].get<std::uint64_t>()};
}

SearchConfig get_search(const ojson& j) {
  SearchConfig s;
  s.lambda0 = j["lambda0"].get<double>();
  s.growth = j["growth"].get<double>();
  s.max_steps = j["max_steps"].get<std::size_t>();
  s.pixel_budget = j["pixel_budget"].get<double>();
  s.target_fraction = j["target_fraction"].get<double>();
  return s;
}

RimSpec get_rim(const ojson& j) {
  RimSpec r;
  r.slice_begin = j["slice_begin"].get<std::size_t>();
  r.slice_end = j["slice_end"].get<std::size_t>();
  r.angle_center = j["angle_center"].get<double>();
  r.angle_extent = j["angle_extent"].get<double>();
  r.thickness = j["thickness"].get<double>();
  r.intensity = j["intensity"].get<double>();
  return r;
}

ojson schema_json() {
  RunConfig defaults;
  if (!defaults.phantom.rim) defaults.phantom.rim = RimSpec{};
  return to_json(defaults);
}

}  // namespace

ojson to_json(const RunConfig& c) {
  ojson j;
  j["output_dir"] = c.output_dir.generic_string();
  const PhantomSpec& p = c.phantom;
  j["phantom"] = {{"depth", p.depth},
                  {"height", p.height},
                  {"width", p.width},
                  {"center", vec3(p.center)},
                  {"semi_axes", vec3(p.semi_axes)},
                  {"interior", p.interior},
                  {"background", p.background},
                  {"noise", p.noise},
                  {"rim", p.rim ? rim_json(*p.rim) : ojson(nullptr)},
                  {"seed", p.seed}};
  const DatasetJitter& jt = c.dataset.jitter;
  j["dataset"] = {{"n_pos", c.dataset.n_pos},
                  {"n_neg", c.dataset.n_neg},
                  {"seed", c.dataset.seed},
                  {"jitter",
                   {{"center", jt.center},
                    {"axis", jt.axis},
                    {"angle", jt.angle},
                    {"rim_min_len", jt.rim_min_len},
                    {"rim_max_len", jt.rim_max_len},
                    {"rim_margin", jt.rim_margin}}}};
  j["autoencoder"] = {{"latent_dim", c.autoencoder.latent_dim},
                      {"hidden", c.autoencoder.hidden},
                      {"init_seed", c.autoencoder.init_seed}};
  j["train_ae"] = train_json(c.train_ae);
  j["train_scorer"] = train_json(c.train_scorer);
  j["scorer"] = {{"kind", c.scorer.kind},
                 {"constant_value", c.scorer.constant_value},
                 {"seg_weight", c.scorer.seg_weight},
                 {"seg_bias", c.scorer.seg_bias},
                 {"heldout_pos", c.scorer.heldout_pos},
                 {"heldout_neg", c.scorer.heldout_neg},
                 {"heldout_seed", c.scorer.heldout_seed}};
  j["search"] = search_json(c.search);
  j["scan_search"] = search_json(c.scan_search);
  j["chunk"] = {{"start", c.chunk.start},
                {"length", c.chunk.length},
                {"scan_size", c.chunk.scan_size},
                {"scan_stride", c.chunk.scan_stride}};
  j["evaluate"] = {{"chunk_size", c.evaluate.chunk_size},
                   {"sweep_sizes", c.evaluate.sweep_sizes},
                   {"bins", c.evaluate.bins},
                   {"permutation_iterations", c.evaluate.permutation_iterations},
                   {"permutation_seed", c.evaluate.permutation_seed},
                   {"cf_negatives", c.evaluate.cf_negatives}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& patch) {
  ojson j = to_json(RunConfig{});
  overlay(j, schema_json(), patch, "");

  RunConfig c;
  c.output_dir = j["output_dir"].get<std::string>();
  const ojson& p = j["phantom"];
  c.phantom.depth = p["depth"].get<std::size_t>();
  c.phantom.height = p["height"].get<std::size_t>();
  c.phantom.width = p["width"].get<std::size_t>();
  c.phantom.center = get_vec3(p["center"], "phantom.center");
  c.phantom.semi_axes = get_vec3(p["semi_axes"], "phantom.semi_axes");
  c.phantom.interior = p["interior"].get<double>();
  c.phantom.background = p["background"].get<double>();
  c.phantom.noise = p["noise"].get<double>();
  c.phantom.rim = p["rim"].is_null() ? std::nullopt : std::optional<RimSpec>(get_rim(p["rim"]));
  c.phantom.seed = p["seed"].get<std::uint64_t>();

  const ojson& d = j["dataset"];
  c.dataset.n_pos = d["n_pos"].get<std::size_t>();
  c.dataset.n_neg = d["n_neg"].get<std::size_t>();
  c.dataset.seed = d["seed"].get<std::uint64_t>();
  const ojson& jt = d["jitter"];
  c.dataset.jitter.center = jt["center"].get<double>();
  c.dataset.jitter.axis = jt["axis"].get<double>();
  c.dataset.jitter.angle = jt["angle"].get<double>();
  c.dataset.jitter.rim_min_len = jt["rim_min_len"].get<std::size_t>();
  c.dataset.jitter.rim_max_len = jt["rim_max_len"].get<std::size_t>();
  c.dataset.jitter.rim_margin = jt["rim_margin"].get<std::size_t>();

  const ojson& a = j["autoencoder"];
  c.autoencoder.latent_dim = a["latent_dim"].get<std::size_t>();
  c.autoencoder.hidden = a["hidden"].get<std::size_t>();
  c.autoencoder.init_seed = a["init_seed"].get<std::uint64_t>();

  c.train_ae = get_train(j["train_ae"]);
  c.train_scorer = get_train(j["train_scorer"]);

  const ojson& s = j["scorer"];
  c.scorer.kind = s["kind"].get<std::string>();
  c.scorer.constant_value = s["constant_value"].get<double>();
  c.scorer.seg_weight = s["seg_weight"].get<double>();
  c.scorer.seg_bias = s["seg_bias"].get<double>();
  c.scorer.heldout_pos = s["heldout_pos"].get<std::size_t>();
  c.scorer.heldout_neg = s["heldout_neg"].get<std::size_t>();
  c.scorer.heldout_seed = s["heldout_seed"].get<std::uint64_t>();

  c.search = get_search(j["search"]);
  c.scan_search = get_search(j["scan_search"]);

  const ojson& ch = j["chunk"];
  c.chunk.start = ch["start"].get<std::size_t>();
  c.chunk.length = ch["length"].get<std::size_t>();
  c.chunk.scan_size = ch["scan_size"].get<std::size_t>();
  c.chunk.scan_stride = ch["scan_stride"].get<std::size_t>();

  const ojson& e = j["evaluate"];
  c.evaluate.chunk_size = e["chunk_size"].get<std::size_t>();
  c.evaluate.sweep_sizes = e["sweep_sizes"].get<std::vector<std::size_t>>();
  c.evaluate.bins = e["bins"].get<std::size_t>();
  c.evaluate.permutation_iterations = e["permutation_iterations"].get<std::size_t>();
  c.evaluate.permutation_seed = e["permutation_seed"].get<std::uint64_t>();
  c.evaluate.cf_negatives = e["cf_negatives"].get<bool>();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::MalformedFile, path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace ctcf
