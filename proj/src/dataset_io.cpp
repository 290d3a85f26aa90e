#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mulearn/data.hpp"

namespace mulearn {

using Json = nlohmann::ordered_json;

namespace {

// Label ids are 1-based in memory and 0-based on disk.
int to_disk(Label k) { return k == kUnlabelled ? -1 : k - 1; }

// Reads typed fields while tracking where in the file it is, so errors can
// name the line, instance and field.
class Reader {
 public:
  Reader(int line, std::string instance) : line_(line), instance_(std::move(instance)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    std::string where = "line " + std::to_string(line_);
    if (!instance_.empty()) where += ", instance '" + instance_ + "'";
    throw ValidationError(where + ", field '" + field + "': " + what);
  }

  const Json& member(const Json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
    return *it;
  }

  int integer(const Json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::string string(const Json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  std::vector<double> numbers(const Json& v, const std::string& path) const {
    std::vector<double> out;
    const auto& arr = array(v, path);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(number(arr[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Label label(const Json& v, const std::string& path, int num_labels, bool allow_unlabelled) const {
    const int raw = integer(v, path);
    if (allow_unlabelled && raw == -1) return kUnlabelled;
    if (raw < 0 || raw >= num_labels)
      fail(path, "label id " + std::to_string(raw) + " outside [0, " + std::to_string(num_labels) + ")");
    return raw + 1;
  }

 private:
  int line_;
  std::string instance_;
};

Json header_json(const DatasetHeader& h) {
  Json j;
  j["format"] = "mulearn-dataset";
  j["version"] = kDatasetFormatVersion;
  j["num_labels"] = h.num_labels;
  j["unary_dim"] = h.unary_dim;
  j["edge_dim"] = h.edge_dim;
  j["label_names"] = h.label_names;
  Json bg = Json::array();
  for (Label k : h.background_labels) bg.push_back(to_disk(k));
  j["background_labels"] = bg;
  return j;
}

Json instance_json(const Instance& inst) {
  Json j;
  j["id"] = inst.id;
  Json nodes = Json::array();
  for (const auto& n : inst.nodes) nodes.push_back(Json{{"pixels", n.pixel_count}, {"features", n.features}});
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (const auto& e : inst.edges) edges.push_back(Json{{"u", e.u}, {"v", e.v}, {"features", e.features}});
  j["edges"] = edges;
  if (inst.grid) {
    const auto map = inst.grid->node_map();
    j["grid"] = Json{{"height", inst.grid->height()},
                     {"width", inst.grid->width()},
                     {"node_map", std::vector<int>(map.begin(), map.end())}};
  }
  Json a;
  if (const auto* full = std::get_if<FullAnnotation>(&inst.annotation)) {
    a["type"] = "full";
    Json labels = Json::array();
    for (Label k : full->labels) labels.push_back(to_disk(k));
    a["labels"] = labels;
  } else {
    const auto& weak = std::get<WeakAnnotation>(inst.annotation);
    a["type"] = "weak";
    Json il = Json::array();
    for (Label k : weak.image_level) il.push_back(to_disk(k));
    a["image_level"] = il;
    Json boxes = Json::array();
    for (const auto& b : weak.boxes)
      boxes.push_back(
          Json{{"label", to_disk(b.label)}, {"left", b.left}, {"top", b.top}, {"right", b.right}, {"bottom", b.bottom}});
    a["boxes"] = boxes;
    Json seeds = Json::array();
    for (const auto& s : weak.seeds) seeds.push_back(Json{{"label", to_disk(s.label)}, {"row", s.row}, {"col", s.col}});
    a["seeds"] = seeds;
  }
  j["annotation"] = a;
  return j;
}

DatasetHeader parse_header(const Json& j) {
  const Reader r(1, "");
  DatasetHeader h;
  if (r.string(r.member(j, "format", ""), "format") != "mulearn-dataset") r.fail("format", "not a dataset file");
  const int version = r.integer(r.member(j, "version", ""), "version");
  if (version != kDatasetFormatVersion) r.fail("version", "unsupported version " + std::to_string(version));
  h.num_labels = r.integer(r.member(j, "num_labels", ""), "num_labels");
  if (h.num_labels < 2) r.fail("num_labels", "need at least 2 labels");
  h.unary_dim = r.integer(r.member(j, "unary_dim", ""), "unary_dim");
  h.edge_dim = r.integer(r.member(j, "edge_dim", ""), "edge_dim");
  if (h.unary_dim < 0) r.fail("unary_dim", "negative");
  if (h.edge_dim < 0) r.fail("edge_dim", "negative");
  const auto& names = r.array(r.member(j, "label_names", ""), "label_names");
  for (std::size_t i = 0; i < names.size(); ++i)
    h.label_names.push_back(r.string(names[i], "label_names[" + std::to_string(i) + "]"));
  if (!h.label_names.empty() && static_cast<int>(h.label_names.size()) != h.num_labels)
    r.fail("label_names", "expected one name per label");
  const auto& bg = r.array(r.member(j, "background_labels", ""), "background_labels");
  for (std::size_t i = 0; i < bg.size(); ++i)
    h.background_labels.push_back(r.label(bg[i], "background_labels[" + std::to_string(i) + "]", h.num_labels, false));
  std::sort(h.background_labels.begin(), h.background_labels.end());
  h.background_labels.erase(std::unique(h.background_labels.begin(), h.background_labels.end()),
                            h.background_labels.end());
  return h;
}

Instance parse_instance(const Json& j, int line, const DatasetHeader& h) {
  std::string id;
  if (j.is_object() && j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
  const Reader r(line, id);
  Instance inst;
  inst.id = r.string(r.member(j, "id", ""), "id");
  inst.num_labels = h.num_labels;
  inst.edge_dim = h.edge_dim;

  const auto& nodes = r.array(r.member(j, "nodes", ""), "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    Node n;
    n.pixel_count = r.number(r.member(nodes[i], "pixels", path), path + ".pixels");
    n.features = r.numbers(r.member(nodes[i], "features", path), path + ".features");
    if (static_cast<int>(n.features.size()) != h.unary_dim)
      r.fail(path + ".features", "expected " + std::to_string(h.unary_dim) + " values");
    inst.nodes.push_back(std::move(n));
  }
  const auto& edges = r.array(r.member(j, "edges", ""), "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "edges[" + std::to_string(i) + "]";
    Edge e;
    e.u = r.integer(r.member(edges[i], "u", path), path + ".u");
    e.v = r.integer(r.member(edges[i], "v", path), path + ".v");
    e.features = r.numbers(r.member(edges[i], "features", path), path + ".features");
    if (static_cast<int>(e.features.size()) != h.edge_dim)
      r.fail(path + ".features", "expected " + std::to_string(h.edge_dim) + " values");
    inst.edges.push_back(std::move(e));
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    const int height = r.integer(r.member(g, "height", "grid"), "grid.height");
    const int width = r.integer(r.member(g, "width", "grid"), "grid.width");
    const auto& map = r.array(r.member(g, "node_map", "grid"), "grid.node_map");
    std::vector<int> node_map;
    for (std::size_t i = 0; i < map.size(); ++i)
      node_map.push_back(r.integer(map[i], "grid.node_map[" + std::to_string(i) + "]"));
    try {
      inst.grid.emplace(height, width, std::move(node_map));
    } catch (const Error& e) {
      r.fail("grid", e.what());
    }
  }

  const auto& a = r.member(j, "annotation", "");
  const std::string type = r.string(r.member(a, "type", "annotation"), "annotation.type");
  if (type == "full") {
    FullAnnotation full;
    const auto& labels = r.array(r.member(a, "labels", "annotation"), "annotation.labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
      full.labels.push_back(r.label(labels[i], "annotation.labels[" + std::to_string(i) + "]", h.num_labels, true));
    inst.annotation = std::move(full);
  } else if (type == "weak") {
    WeakAnnotation weak;
    const auto& il = r.array(r.member(a, "image_level", "annotation"), "annotation.image_level");
    for (std::size_t i = 0; i < il.size(); ++i)
      weak.image_level.push_back(
          r.label(il[i], "annotation.image_level[" + std::to_string(i) + "]", h.num_labels, false));
    const auto& boxes = r.array(r.member(a, "boxes", "annotation"), "annotation.boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::string path = "annotation.boxes[" + std::to_string(i) + "]";
      BoundingBox b;
      b.label = r.label(r.member(boxes[i], "label", path), path + ".label", h.num_labels, false);
      b.left = r.integer(r.member(boxes[i], "left", path), path + ".left");
      b.top = r.integer(r.member(boxes[i], "top", path), path + ".top");
      b.right = r.integer(r.member(boxes[i], "right", path), path + ".right");
      b.bottom = r.integer(r.member(boxes[i], "bottom", path), path + ".bottom");
      weak.boxes.push_back(b);
    }
    const auto& seeds = r.array(r.member(a, "seeds", "annotation"), "annotation.seeds");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const std::string path = "annotation.seeds[" + std::to_string(i) + "]";
      Seed s;
      s.label = r.label(r.member(seeds[i], "label", path), path + ".label", h.num_labels, false);
      s.row = r.integer(r.member(seeds[i], "row", path), path + ".row");
      s.col = r.integer(r.member(seeds[i], "col", path), path + ".col");
      weak.seeds.push_back(s);
    }
    inst.annotation = std::move(weak);
  } else {
    r.fail("annotation.type", "expected \"full\" or \"weak\", got \"" + type + "\"");
  }

  try {
    validate_instance(inst, h.unary_dim, h.edge_dim);
  } catch (const Error& e) {
    r.fail("instance", e.what());
  }
  return inst;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  return in;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

std::vector<Label> DatasetHeader::thing_labels() const {
  std::vector<Label> out;
  for (Label k = 1; k <= num_labels; ++k)
    if (!std::binary_search(background_labels.begin(), background_labels.end(), k)) out.push_back(k);
  return out;
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out = header_json(dataset.header).dump() + "\n";
  for (const auto& inst : dataset.instances) out += instance_json(inst).dump() + "\n";
  return out;
}

Dataset dataset_from_jsonl(std::istream& in) {
  Dataset ds;
  std::string text;
  int line = 0;
  bool have_header = false;
  std::vector<std::string> ids;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line) + ": malformed JSON: " + e.what());
    }
    if (!have_header) {
      ds.header = parse_header(j);
      have_header = true;
      continue;
    }
    ds.instances.push_back(parse_instance(j, line, ds.header));
    ids.push_back(ds.instances.back().id);
  }
  if (!have_header) throw ValidationError("line 1: missing dataset header");
  std::sort(ids.begin(), ids.end());
  const auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw ValidationError("duplicate instance id '" + *dup + "'");
  return ds;
}

Dataset load_dataset(const std::string& path) {
  auto in = open_in(path);
  try {
    return dataset_from_jsonl(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_dataset(const std::string& path, const Dataset& dataset) { write_file(path, dataset_to_jsonl(dataset)); }

std::string model_to_json(const Model& model) {
  Json j;
  j["format"] = "mulearn-model";
  j["version"] = kModelFormatVersion;
  j["num_labels"] = model.num_labels();
  j["unary_dim"] = model.unary_dim();
  j["pairwise_dim"] = model.pairwise_dim();
  Json unary = Json::array();
  for (Label k = 1; k <= model.num_labels(); ++k) {
    const auto w = model.unary(k);
    unary.push_back(std::vector<double>(w.begin(), w.end()));
  }
  j["unary"] = unary;
  const auto p = model.pairwise();
  j["pairwise"] = std::vector<double>(p.begin(), p.end());
  return j.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("model: malformed JSON: ") + e.what());
  }
  const Reader r(1, "");
  if (r.string(r.member(j, "format", ""), "format") != "mulearn-model") r.fail("format", "not a model file");
  if (r.integer(r.member(j, "version", ""), "version") != kModelFormatVersion) r.fail("version", "unsupported");
  const int K = r.integer(r.member(j, "num_labels", ""), "num_labels");
  const int d = r.integer(r.member(j, "unary_dim", ""), "unary_dim");
  const int e = r.integer(r.member(j, "pairwise_dim", ""), "pairwise_dim");
  const auto& unary = r.array(r.member(j, "unary", ""), "unary");
  if (static_cast<int>(unary.size()) != K) r.fail("unary", "expected one block per label");
  std::vector<double> w;
  for (int k = 0; k < K; ++k) {
    const auto block = r.numbers(unary[k], "unary[" + std::to_string(k) + "]");
    if (static_cast<int>(block.size()) != d) r.fail("unary[" + std::to_string(k) + "]", "wrong length");
    w.insert(w.end(), block.begin(), block.end());
  }
  const auto pair = r.numbers(r.member(j, "pairwise", ""), "pairwise");
  if (static_cast<int>(pair.size()) != e) r.fail("pairwise", "wrong length");
  w.insert(w.end(), pair.begin(), pair.end());
  return Model(K, d, e, std::move(w));
}

Model load_model(const std::string& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_model(const std::string& path, const Model& model) { write_file(path, model_to_json(model)); }

}  // namespace mulearn
