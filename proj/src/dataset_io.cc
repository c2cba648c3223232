#include "lta/dataset_io.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lta/errors.h"

namespace lta {
namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const std::string& tok : split_on(s, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::string next_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) {
    throw DataError(std::string("unexpected end of input reading ") + what);
  }
  return tok;
}

void expect(std::istream& in, const std::string& keyword) {
  const std::string tok = next_token(in, keyword.c_str());
  if (tok != keyword) {
    throw DataError("expected '" + keyword + "', found '" + tok + "'");
  }
}

int next_int(std::istream& in, const char* what) {
  const std::string tok = next_token(in, what);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw DataError(std::string("bad integer for ") + what + ": " + tok);
  }
}

std::uint64_t next_u64(std::istream& in, const char* what) {
  const std::string tok = next_token(in, what);
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    throw DataError(std::string("bad integer for ") + what + ": " + tok);
  }
}

double next_double(std::istream& in, const char* what) {
  return parse_double(next_token(in, what));
}

void write_values(std::ostream& out, const std::vector<double>& values,
                  std::size_t begin, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    if (k) out << ' ';
    out << format_double(values[begin + k]);
  }
  out << '\n';
}

void write_enriched(std::ostream& out, const EnrichedNet& g) {
  out << "enriched " << injection_name(g.injection()) << ' ' << g.x_dim() << ' '
      << g.h_dim() << ' ' << g.num_classes() << ' '
      << activation_name(g.hidden_activation) << '\n';
  write_net(out, g.trunk);
  write_net(out, g.film_gen);
  write_net(out, g.head);
}

EnrichedNet read_enriched(std::istream& in) {
  expect(in, "enriched");
  EnrichedNet g;
  const Injection inj = parse_injection(next_token(in, "injection"));
  const int x_dim = next_int(in, "x_dim");
  const int h_dim = next_int(in, "h_dim");
  const int classes = next_int(in, "classes");
  g.hidden_activation = parse_activation(next_token(in, "activation"));
  g.set_shape(inj, x_dim, h_dim, classes);
  g.trunk = read_net(in);
  g.film_gen = read_net(in);
  g.head = read_net(in);
  return g;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw DataError("cannot parse number '" + token + "'");
  }
  return v;
}

void write_dataset(std::ostream& out, const TaskDataset& ds) {
  out << "# lta-dataset v1 task=" << ds.task << " classes=" << ds.num_classes
      << " features=" << ds.feature_dim << " feedback=" << ds.feedback_dim
      << " feedback_mode=" << ds.feedback_mode
      << " machine=" << join_ints(ds.machine_features)
      << " expert=" << join_ints(ds.expert_features)
      << " conditions=" << ds.num_conditions << '\n';
  for (int j = 0; j < ds.feature_dim; ++j) out << 'x' << j << ',';
  out << 'y';
  for (int j = 0; j < ds.feedback_dim; ++j) out << ",h" << j;
  out << ",split";
  for (int j = 0; j < ds.num_conditions; ++j) out << ",p" << j;
  out << ",weight\n";
  for (const LabeledSample& s : ds.samples) {
    for (double v : s.x) out << format_double(v) << ',';
    out << s.y;
    for (int j = 0; j < ds.feedback_dim; ++j) {
      out << ',' << (s.h.empty() ? std::string() : format_double(s.h[j]));
    }
    out << ',' << split_name(s.split);
    for (int j = 0; j < ds.num_conditions; ++j) {
      out << ',' << format_double(s.consensus.at(j));
    }
    out << ',' << format_double(s.weight) << '\n';
  }
}

TaskDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lta-dataset v1", 0) != 0) {
    throw DataError("missing lta-dataset header line");
  }
  TaskDataset ds;
  std::istringstream meta(line.substr(16));
  std::string kv;
  while (meta >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw DataError("bad header field " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "task") {
      ds.task = val;
    } else if (key == "classes") {
      ds.num_classes = std::stoi(val);
    } else if (key == "features") {
      ds.feature_dim = std::stoi(val);
    } else if (key == "feedback") {
      ds.feedback_dim = std::stoi(val);
    } else if (key == "feedback_mode") {
      ds.feedback_mode = val;
    } else if (key == "machine") {
      ds.machine_features = parse_ints(val);
    } else if (key == "expert") {
      ds.expert_features = parse_ints(val);
    } else if (key == "conditions") {
      ds.num_conditions = std::stoi(val);
    }
  }
  if (!std::getline(in, line)) throw DataError("missing column header row");
  const std::size_t columns = static_cast<std::size_t>(
      ds.feature_dim + 1 + ds.feedback_dim + 1 + ds.num_conditions + 1);
  if (split_on(line, ',').size() != columns) {
    throw DataError("column header does not match metadata");
  }
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_on(line, ',');
    if (cells.size() != columns) {
      throw DataError("line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(columns));
    }
    LabeledSample s;
    std::size_t c = 0;
    for (int j = 0; j < ds.feature_dim; ++j) s.x.push_back(parse_double(cells[c++]));
    s.y = std::stoi(cells[c++]);
    bool has_h = ds.feedback_dim > 0 && !cells[c].empty();
    for (int j = 0; j < ds.feedback_dim; ++j, ++c) {
      if (has_h) s.h.push_back(parse_double(cells[c]));
    }
    s.split = parse_split(cells[c++]);
    for (int j = 0; j < ds.num_conditions; ++j) {
      s.consensus.push_back(parse_double(cells[c++]));
    }
    s.weight = parse_double(cells[c++]);
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

// dense_net <layers>
// layer <in> <out> <activation>
// <out rows of in weights>
// <out biases>
void write_net(std::ostream& out, const DenseNet& net) {
  out << "dense_net " << net.layers().size() << '\n';
  for (const DenseLayer& layer : net.layers()) {
    out << "layer " << layer.in_dim << ' ' << layer.out_dim << ' '
        << activation_name(layer.activation) << '\n';
    for (int r = 0; r < layer.out_dim; ++r) {
      write_values(out, layer.weights, static_cast<std::size_t>(r) * layer.in_dim,
                   layer.in_dim);
    }
    write_values(out, layer.bias, 0, layer.out_dim);
  }
}

DenseNet read_net(std::istream& in) {
  expect(in, "dense_net");
  const int count = next_int(in, "layer count");
  if (count < 0) throw DataError("negative layer count");
  std::vector<DenseLayer> layers;
  for (int l = 0; l < count; ++l) {
    expect(in, "layer");
    DenseLayer layer;
    layer.in_dim = next_int(in, "layer in");
    layer.out_dim = next_int(in, "layer out");
    if (layer.in_dim < 1 || layer.out_dim < 1) {
      throw DataError("layer dimensions must be positive");
    }
    layer.activation = parse_activation(next_token(in, "activation"));
    layer.weights.resize(static_cast<std::size_t>(layer.in_dim) * layer.out_dim);
    for (double& w : layer.weights) w = next_double(in, "weight");
    layer.bias.resize(layer.out_dim);
    for (double& b : layer.bias) b = next_double(in, "bias");
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

// expert <kind> <classes> <conditions>
// features <n> <i...>
// tree <input_dim> <node count>
// node <feature> <threshold> <left> <right> <label>   (per node)
void write_expert(std::ostream& out, const ExpertModel& e) {
  out << "expert " << expert_kind_name(e.kind) << ' ' << e.num_classes << ' '
      << e.num_conditions << '\n';
  out << "features " << e.feature_indices.size();
  for (int f : e.feature_indices) out << ' ' << f;
  out << '\n';
  out << "tree " << e.tree.input_dim << ' ' << e.tree.nodes.size() << '\n';
  for (const TreeNode& n : e.tree.nodes) {
    out << "node " << n.feature << ' ' << format_double(n.threshold) << ' '
        << n.left << ' ' << n.right << ' ' << n.label << '\n';
  }
}

ExpertModel read_expert(std::istream& in) {
  expect(in, "expert");
  ExpertModel e;
  e.kind = parse_expert_kind(next_token(in, "expert kind"));
  e.num_classes = next_int(in, "classes");
  e.num_conditions = next_int(in, "conditions");
  expect(in, "features");
  const int nf = next_int(in, "feature count");
  for (int k = 0; k < nf; ++k) e.feature_indices.push_back(next_int(in, "feature"));
  expect(in, "tree");
  e.tree.input_dim = next_int(in, "tree input dim");
  const int nodes = next_int(in, "node count");
  e.tree.num_classes = e.num_classes;
  e.tree.features = e.feature_indices;
  for (int k = 0; k < nodes; ++k) {
    expect(in, "node");
    TreeNode n;
    n.feature = next_int(in, "node feature");
    n.threshold = next_double(in, "node threshold");
    n.left = next_int(in, "node left");
    n.right = next_int(in, "node right");
    n.label = next_int(in, "node label");
    if ((n.feature >= 0 && (n.left < 0 || n.left >= nodes || n.right < 0 ||
                            n.right >= nodes)) ||
        n.label < 0 || n.label >= e.num_classes) {
      throw DataError("malformed tree node " + std::to_string(k));
    }
    e.tree.nodes.push_back(n);
  }
  return e;
}

// lta-bundle v1, then `key value` pairs up to `f`, then the three models.
void write_bundle(std::ostream& out, const ModelBundle& b) {
  const TrainPlan& p = b.plan;
  out << "lta-bundle v1\n"
      << "method " << method_name(b.method) << '\n'
      << "num_classes " << b.num_classes << '\n'
      << "data_seed " << b.data_seed << '\n'
      << "train_seed " << b.train_seed << '\n'
      << "pretrain_epochs " << p.pretrain_epochs << '\n'
      << "main_epochs " << p.main_epochs << '\n'
      << "learning_rate " << format_double(p.sgd.learning_rate) << '\n'
      << "batch_size " << p.sgd.batch_size << '\n'
      << "alpha " << format_double(p.cost.alpha) << '\n'
      << "delta " << format_double(p.cost.delta) << '\n'
      << "hidden " << p.hidden << '\n'
      << "injection " << injection_name(p.injection) << '\n';
  out << "f\n";
  write_net(out, b.f);
  out << "g\n";
  write_enriched(out, b.g);
  out << "s\n";
  write_net(out, b.s);
}

ModelBundle read_bundle(std::istream& in) {
  expect(in, "lta-bundle");
  expect(in, "v1");
  ModelBundle b;
  TrainPlan& p = b.plan;
  while (true) {
    const std::string key = next_token(in, "bundle field");
    if (key == "f") break;
    if (key == "method") {
      b.method = parse_method(next_token(in, "method"));
      p.method = b.method;
    } else if (key == "num_classes") {
      b.num_classes = next_int(in, key.c_str());
    } else if (key == "data_seed") {
      b.data_seed = next_u64(in, key.c_str());
    } else if (key == "train_seed") {
      b.train_seed = next_u64(in, key.c_str());
      p.sgd.seed = b.train_seed;
    } else if (key == "pretrain_epochs") {
      p.pretrain_epochs = next_int(in, key.c_str());
    } else if (key == "main_epochs") {
      p.main_epochs = next_int(in, key.c_str());
    } else if (key == "learning_rate") {
      p.sgd.learning_rate = next_double(in, key.c_str());
    } else if (key == "batch_size") {
      p.sgd.batch_size = next_int(in, key.c_str());
    } else if (key == "alpha") {
      p.cost.alpha = next_double(in, key.c_str());
    } else if (key == "delta") {
      p.cost.delta = next_double(in, key.c_str());
    } else if (key == "hidden") {
      p.hidden = next_int(in, key.c_str());
    } else if (key == "injection") {
      p.injection = parse_injection(next_token(in, key.c_str()));
    } else {
      throw DataError("unknown bundle field '" + key + "'");
    }
  }
  p.sgd.epochs = p.total_epochs();
  b.f = read_net(in);
  expect(in, "g");
  b.g = read_enriched(in);
  expect(in, "s");
  b.s = read_net(in);
  return b;
}

void save_dataset(const std::string& path, const TaskDataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_dataset(out, ds);
  if (!out) throw DataError("write failed for " + path);
}

TaskDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return read_dataset(in);
}

void save_bundle(const std::string& path, const ModelBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_bundle(out, bundle);
  if (!out) throw DataError("write failed for " + path);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return read_bundle(in);
}

}  // namespace lta
