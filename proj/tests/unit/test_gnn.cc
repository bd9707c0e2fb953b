#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "nsearch/core/format_error.h"
#include "nsearch/gnn/grad_check.h"
#include "nsearch/gnn/loss.h"
#include "nsearch/gnn/model.h"
#include "nsearch/gnn/network.h"
#include "nsearch/gnn/predictor.h"
#include "nsearch/gnn/serialize.h"
#include "nsearch/gnn/train.h"
#include "random_graphs.h"

using namespace nsearch;
using namespace nsearch::gnn;

namespace {

Architecture graph_arch(int hidden = 8, int layers = 2) {
  return {Variant::kGraph, 3, 2, 0, hidden, layers};
}

Architecture bipartite_arch(int hidden = 8, int layers = 2) {
  return {Variant::kBipartite, 1, 1, 1, hidden, layers};
}

LabeledSample graph_sample(uint64_t seed, int nodes = 7) {
  FeatureGraph g = testutil::random_feature_graph(seed, nodes, 3, 2);
  const size_t items = g.targets.size();
  return {g, testutil::random_mask(seed + 1, items), "g" + std::to_string(seed)};
}

LabeledSample bipartite_sample(uint64_t seed, int vars = 6, int cons = 4) {
  BipartiteGraph b = testutil::random_bipartite(seed, vars, cons);
  return {b, testutil::random_mask(seed + 1, static_cast<size_t>(vars)), "b" + std::to_string(seed)};
}

// Straightforward per-node evaluation of one message-passing layer.
Eigen::MatrixXd naive_layer(const Eigen::MatrixXd& v, const std::vector<Message>& msgs,
                            const Eigen::MatrixXd& e, const std::vector<Eigen::MatrixXd>& w) {
  Eigen::MatrixXd out(w[9].rows(), v.cols());
  for (int i = 0; i < v.cols(); ++i) {
    Eigen::VectorXd agg = Eigen::VectorXd::Zero(w[4].rows());
    for (const Message& m : msgs) {
      if (m.dst != i) continue;
      Eigen::VectorXd hid = w[0] * v.col(i) + w[1] * v.col(m.src) + w[2] * e.col(m.edge) + w[3];
      for (int k = 0; k < hid.size(); ++k) hid(k) = std::max(0.0, hid(k));
      agg += w[4] * hid + w[5];
    }
    Eigen::VectorXd hid = w[6] * v.col(i) + w[7] * agg + w[8];
    for (int k = 0; k < hid.size(); ++k) hid(k) = std::max(0.0, hid(k));
    out.col(i) = w[9] * hid + w[10];
  }
  return out;
}

std::vector<Eigen::MatrixXd> random_layer_weights(uint64_t seed, int d, int h, int m) {
  Rng rng(seed);
  auto mat = [&](int r, int c) {
    Eigen::MatrixXd x(r, c);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(0, 0.7);
    return x;
  };
  return {mat(h, d), mat(h, d), mat(h, m), mat(h, 1), mat(h, h), mat(h, 1),
          mat(h, d), mat(h, h), mat(h, 1), mat(d, h), mat(d, 1)};
}

MessagePassingParams as_params(const std::vector<Eigen::MatrixXd>& w) {
  return {w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7], w[8], w[9], w[10]};
}

}  // namespace

TEST_CASE("wce loss hand values") {
  const std::vector<double> p{0.5}, y{1.0};
  CHECK(wce_loss(p, y, 0.7) == doctest::Approx(0.7 * std::log(2.0)).epsilon(1e-12));
  CHECK(wce_loss(p, y, 0.7) == doctest::Approx(0.4852).epsilon(1e-4));
  const std::vector<double> perfect_p{1.0, 0.0, 1.0}, perfect_y{1.0, 0.0, 1.0};
  CHECK(wce_loss(perfect_p, perfect_y, 0.8) <= 1e-10);
}

TEST_CASE("wce at lambda one half is half the cross-entropy") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(5), y(5);
    for (int i = 0; i < 5; ++i) {
      p[static_cast<size_t>(i)] = rng.uniform01();
      y[static_cast<size_t>(i)] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    CHECK(std::abs(wce_loss(p, y, 0.5) - 0.5 * cross_entropy(p, y)) <= 1e-12);
  }
}

TEST_CASE("focal loss hand values and limits") {
  const std::vector<double> p{0.9}, y{1.0};
  CHECK(focal_loss(p, y, 1.0, 2.0) == doctest::Approx(0.01 * -std::log(0.9)).epsilon(1e-12));
  CHECK(focal_loss(p, y, 1.0, 2.0) == doctest::Approx(1.054e-3).epsilon(1e-3));
  Rng rng(9);
  std::vector<double> pp(8), yy(8);
  for (size_t i = 0; i < 8; ++i) {
    pp[i] = rng.uniform01();
    yy[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  CHECK(focal_loss(pp, yy, 1.0, 0.0) == doctest::Approx(cross_entropy(pp, yy)).epsilon(1e-14));
  // Ratio focal/CE for a well-classified item is (1 - p_t)^gamma.
  const std::vector<double> easy{0.99}, one{1.0};
  const double ratio = focal_loss(easy, one, 1.0, 2.0) / cross_entropy(easy, one);
  CHECK(ratio == doctest::Approx(1e-4).epsilon(1e-9));
  const std::vector<double> hard{0.6};
  CHECK(focal_loss(hard, one, 1.0, 2.0) / cross_entropy(hard, one) > ratio);
}

TEST_CASE("loss parameters are validated") {
  CHECK_THROWS_AS(LossSpec::wce(0.4).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LossSpec::focal(0.0, 2.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LossSpec::focal(0.5, -1.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(LossSpec::wce(1.0).validate());
}

TEST_CASE("logit gradient matches finite differences of the loss") {
  Rng rng(11);
  for (const LossSpec spec : {LossSpec::wce(0.8), LossSpec::focal(0.7, 2.0), LossSpec::focal(0.3, 0.5)}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> z(4), y(4);
      for (size_t i = 0; i < 4; ++i) {
        z[i] = rng.uniform(-4, 4);
        y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      }
      auto probs = [](const std::vector<double>& zz) {
        std::vector<double> p;
        for (double v : zz) p.push_back(1.0 / (1.0 + std::exp(-v)));
        return p;
      };
      CHECK(evaluate_loss_logits(spec, z, y) == doctest::Approx(evaluate_loss(spec, probs(z), y)).epsilon(1e-12));
      const auto g = loss_logit_gradient(spec, z, y);
      for (size_t i = 0; i < 4; ++i) {
        auto zp = z, zm = z;
        zp[i] += 1e-6;
        zm[i] -= 1e-6;
        const double fd = (evaluate_loss(spec, probs(zp), y) - evaluate_loss(spec, probs(zm), y)) / 2e-6;
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-4));
      }
    }
  }
}

TEST_CASE("message passing layer matches a per-node evaluation") {
  const int d = 4, h = 5, m = 2;
  const auto w = random_layer_weights(3, d, h, m);
  Rng rng(4);
  Eigen::MatrixXd v(d, 6), e(m, 5);
  for (int i = 0; i < v.size(); ++i) v.data()[i] = rng.normal(0, 1);
  for (int i = 0; i < e.size(); ++i) e.data()[i] = rng.normal(0, 1);
  std::vector<Message> msgs{{0, 1, 0}, {1, 0, 0}, {1, 2, 1}, {3, 2, 2}, {2, 3, 2}, {4, 0, 3}, {0, 4, 4}};
  const Eigen::MatrixXd out = message_passing_layer(v, v, msgs, e, as_params(w));
  const Eigen::MatrixXd expect = naive_layer(v, msgs, e, w);
  CHECK((out - expect).cwiseAbs().maxCoeff() <= 1e-12);

  SUBCASE("isolated node sees a zero aggregate") {
    Eigen::VectorXd hid = w[6] * v.col(5) + w[8];
    for (int k = 0; k < h; ++k) hid(k) = std::max(0.0, hid(k));
    const Eigen::VectorXd iso = w[9] * hid + w[10];
    CHECK((out.col(5) - iso).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("zero weights give the output bias") {
    auto zero = w;
    for (size_t k = 0; k < zero.size(); ++k) {
      if (k != 10) zero[k].setZero();
    }
    const Eigen::MatrixXd z = message_passing_layer(v, v, msgs, e, as_params(zero));
    for (int i = 0; i < z.cols(); ++i) CHECK((z.col(i) - w[10]).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("relabeling nodes permutes outputs") {
    const std::vector<int> perm{3, 5, 0, 1, 4, 2};  // old -> new
    Eigen::MatrixXd pv(d, 6);
    for (int i = 0; i < 6; ++i) pv.col(perm[static_cast<size_t>(i)]) = v.col(i);
    std::vector<Message> pm;
    for (const Message& msg : msgs) {
      pm.push_back({perm[static_cast<size_t>(msg.src)], perm[static_cast<size_t>(msg.dst)], msg.edge});
    }
    const Eigen::MatrixXd pout = message_passing_layer(pv, pv, pm, e, as_params(w));
    for (int i = 0; i < 6; ++i) {
      CHECK((pout.col(perm[static_cast<size_t>(i)]) - out.col(i)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("dimension mismatch throws") {
    Eigen::MatrixXd bad(d + 1, 6);
    bad.setZero();
    CHECK_THROWS_AS(message_passing_layer(bad, bad, msgs, e, as_params(w)), std::invalid_argument);
    std::vector<Message> out_of_range{{0, 9, 0}};
    CHECK_THROWS_AS(message_passing_layer(v, v, out_of_range, e, as_params(w)), std::invalid_argument);
  }
}

TEST_CASE("parameter layout matches the architecture") {
  const Architecture a = graph_arch(8, 2);
  const ParamLayout layout(a);
  size_t sum = 0;
  for (const auto& s : layout.slices()) {
    CHECK(s.offset == sum);
    sum += s.size();
  }
  CHECK(sum == layout.total());
  CHECK(PolicyModel::random(a, 1).params().size() == layout.total());
  CHECK_THROWS_AS(PolicyModel(a, std::vector<double>(layout.total() + 1)), std::invalid_argument);
}

TEST_CASE("graph forward contracts") {
  const LabeledSample s = graph_sample(21);
  const auto& g = std::get<FeatureGraph>(s.state);
  const PolicyModel zero = PolicyModel::zeros(graph_arch());
  const auto out = forward(zero, s.state);
  CHECK(out.prob.size() == g.targets.size());
  for (double p : out.prob) CHECK(p == 0.5);

  const PolicyModel model = PolicyModel::random(graph_arch(), 5);
  const auto base = model.predict(s.state);
  FeatureGraph flipped = g;
  for (auto& [u, v] : flipped.edges) std::swap(u, v);
  const auto flipped_out = model.predict(flipped);
  for (size_t i = 0; i < base.size(); ++i) CHECK(flipped_out[i] == doctest::Approx(base[i]).epsilon(1e-12));

  CHECK_THROWS_AS(forward(PolicyModel::zeros(bipartite_arch()), s.state), std::invalid_argument);
}

TEST_CASE("graph forward is permutation equivariant") {
  const PolicyModel model = PolicyModel::random(graph_arch(), 8);
  const LabeledSample s = graph_sample(22, 9);
  const auto& g = std::get<FeatureGraph>(s.state);
  std::vector<int> perm(static_cast<size_t>(g.num_nodes));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(1);
  rng.shuffle(perm);
  FeatureGraph pg = g;
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int k = 0; k < g.node_dim; ++k) {
      pg.node_features[static_cast<size_t>(perm[static_cast<size_t>(i)] * g.node_dim + k)] =
          g.node_features[static_cast<size_t>(i * g.node_dim + k)];
    }
  }
  for (auto& [u, v] : pg.edges) {
    u = perm[static_cast<size_t>(u)];
    v = perm[static_cast<size_t>(v)];
  }
  const auto a = model.predict(g);
  const auto b = model.predict(pg);
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("bipartite forward contracts") {
  const PolicyModel zero = PolicyModel::zeros(bipartite_arch());
  const LabeledSample s = bipartite_sample(3);
  for (double p : zero.predict(s.state)) CHECK(p == 0.5);
  CHECK_THROWS_AS(forward(PolicyModel::zeros(graph_arch()), s.state), std::invalid_argument);

  for (uint64_t seed = 0; seed < 100; ++seed) {
    const PolicyModel model = PolicyModel::random(bipartite_arch(), seed);
    const auto out = forward(model, bipartite_sample(seed + 100).state);
    for (size_t i = 0; i < out.prob.size(); ++i) {
      CHECK(out.prob[i] > 0.0);
      CHECK(out.prob[i] < 1.0);
      CHECK(std::abs(out.prob[i] + out.prob_other[i] - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("bipartite forward is equivariant under variable reordering") {
  const PolicyModel model = PolicyModel::random(bipartite_arch(), 4);
  const BipartiteGraph b = testutil::random_bipartite(17, 8, 5);
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(2);
  rng.shuffle(perm);
  BipartiteGraph pb = b;
  for (int i = 0; i < 8; ++i) pb.var_features[static_cast<size_t>(perm[static_cast<size_t>(i)])] = b.var_features[static_cast<size_t>(i)];
  for (auto& [var, con] : pb.edges) var = perm[static_cast<size_t>(var)];
  const auto a = model.predict(b);
  const auto c = model.predict(pb);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(a[static_cast<size_t>(i)] - c[static_cast<size_t>(perm[static_cast<size_t>(i)])]) <= 1e-12);
  }
}

TEST_CASE("gradient check on a one-parameter logistic model") {
  // loss(w) = WCE(sigmoid(w * x), y); gradient is analytic.
  const double x = 1.7, y = 1.0;
  const LossFunction fn = [&](std::span<const double> p, std::vector<double>* grad, uint64_t* pattern) {
    const double prob = 1.0 / (1.0 + std::exp(-p[0] * x));
    const std::vector<double> pr{prob}, lab{y};
    if (grad != nullptr) (*grad)[0] += -0.7 * (1.0 - prob) * x;
    if (pattern != nullptr) *pattern = 0;
    return wce_loss(pr, lab, 0.7);
  };
  const std::vector<double> w{0.3};
  const auto r = gradient_check(fn, w, 50, 1);
  CHECK(r.checked == 1);
  CHECK(r.max_relative_error < 1e-7);
}

TEST_CASE("gradient check on random graph models with wce") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PolicyModel model = PolicyModel::random(graph_arch(16, 2), seed);
    const auto r = gradient_check(model, graph_sample(seed + 50), LossSpec::wce(0.8), 50, seed);
    CHECK(r.checked >= 50);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("gradient check on random bipartite models with focal loss") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PolicyModel model = PolicyModel::random(bipartite_arch(16, 2), seed);
    const auto r = gradient_check(model, bipartite_sample(seed + 70), LossSpec::focal(0.7, 2.0), 50, seed);
    CHECK(r.checked >= 50);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("training overfits a single sample") {
  const LabeledSample s = graph_sample(31);
  const std::vector<LabeledSample> data{s};
  OptimizerConfig opt;
  opt.epochs = 600;
  const auto r = train(data, {}, infer_architecture(s, 16, 2), LossSpec::wce(0.5), opt, 3);
  CHECK(r.curve.back().train_loss < 0.1);
  CHECK(r.curve.back().train_loss < r.curve.front().train_loss);
}

TEST_CASE("training is deterministic and checkpoints the best validation epoch") {
  std::vector<LabeledSample> tr, va;
  for (uint64_t i = 0; i < 4; ++i) tr.push_back(graph_sample(40 + i));
  for (uint64_t i = 0; i < 2; ++i) va.push_back(graph_sample(60 + i));
  OptimizerConfig opt;
  opt.epochs = 15;
  const Architecture a = infer_architecture(tr[0], 8, 2);
  const auto r1 = train(tr, va, a, LossSpec::wce(0.7), opt, 9);
  const auto r2 = train(tr, va, a, LossSpec::wce(0.7), opt, 9);
  CHECK(r1.model.params() == r2.model.params());
  CHECK(r1.curve.size() == r2.curve.size());
  for (size_t i = 0; i < r1.curve.size(); ++i) {
    CHECK(r1.curve[i].train_loss == r2.curve[i].train_loss);
    CHECK(r1.curve[i].validation_loss == r2.curve[i].validation_loss);
  }
  const double chosen = mean_loss(r1.model, va, LossSpec::wce(0.7));
  CHECK(chosen <= r1.curve.back().validation_loss);
  CHECK(chosen == r1.curve[static_cast<size_t>(r1.best_epoch - 1)].validation_loss);
  CHECK_THROWS_AS(train({}, va, a, LossSpec::wce(0.7), opt, 9), std::invalid_argument);
}

TEST_CASE("initial model scales messages by the largest in-degree") {
  // one constraint touching every variable, like a knapsack capacity row
  BipartiteGraph b;
  b.num_vars = 200;
  b.var_dim = b.cons_dim = b.edge_dim = 1;
  b.num_cons = 1;
  b.cons_features = {5000.0};
  Rng rng(4);
  for (int i = 0; i < b.num_vars; ++i) {
    b.var_features.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    b.edges.emplace_back(i, 0);
    b.edge_features.push_back(static_cast<double>(rng.uniform_int(1, 100)));
  }
  const LabeledSample s{b, testutil::random_mask(5, 200, 0.05), "star"};
  const Architecture arch = infer_architecture(s);
  const PolicyModel raw = PolicyModel::random(arch, Rng::mix(7, 1));
  const PolicyModel init = initial_model(arch, std::span(&s, 1), 7);
  const ParamLayout& layout = init.layout();
  for (size_t i = 0; i < layout.slices().size(); ++i) {
    const ParamSlice& sl = layout.at(i);
    const double scale = sl.name.find(".vc.w_msg_out") != std::string::npos ? 1.0 / 200.0 : 1.0;
    if (sl.name.find(".cv.w_msg_out") != std::string::npos || sl.name.find("b_msg_out") != std::string::npos) continue;
    for (size_t j = 0; j < sl.size(); ++j) {
      CHECK(init.params()[sl.offset + j] == doctest::Approx(scale * raw.params()[sl.offset + j]));
    }
  }
  for (double p : init.predict(s.state)) {
    CHECK(p > 1e-3);
    CHECK(p < 1.0 - 1e-3);
  }
  CHECK_THROWS_AS(initial_model(arch, {}, 7), std::invalid_argument);
}

TEST_CASE("model serialization round trip and gates") {
  PolicyModel model = PolicyModel::random(graph_arch(), 12);
  model.loss = LossSpec::wce(0.8);
  model.standardization.node_mean = {0.1, 0.2, 0.3};
  model.standardization.node_std = {1.0, 2.0, 3.0};
  const std::string bytes = encode_model(model);
  const PolicyModel back = decode_model(bytes);
  CHECK(back.params() == model.params());
  CHECK(back.architecture() == model.architecture());
  CHECK(back.standardization == model.standardization);
  const LabeledSample s = graph_sample(5);
  CHECK(back.predict(s.state) == model.predict(s.state));

  std::string bumped = bytes;
  const auto pos = bumped.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  bumped.replace(pos, 18, "\"format_version\":2");
  CHECK_THROWS_AS(decode_model(bumped), FormatError);
  CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 8)), FormatError);
  CHECK_THROWS_AS(decode_model(bytes + "12345678"), FormatError);

  const auto path = (std::filesystem::temp_directory_path() / "nsearch_model_test.bin").string();
  save_model(model, path);
  CHECK(load_model(path).params() == model.params());
  std::remove(path.c_str());
}

TEST_CASE("dataset json lines round trip") {
  const std::vector<LabeledSample> data{graph_sample(1), bipartite_sample(2), graph_sample(3)};
  const auto path = (std::filesystem::temp_directory_path() / "nsearch_dataset_test.jsonl").string();
  save_dataset(data, path);
  const auto back = load_dataset(path);
  REQUIRE(back.size() == data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].label == data[i].label);
    CHECK(back[i].source == data[i].source);
    CHECK(to_json(back[i]) == to_json(data[i]));
  }
  std::remove(path.c_str());
}

TEST_CASE("standardization statistics") {
  const std::vector<LabeledSample> data{graph_sample(1), graph_sample(2)};
  const Standardization st = compute_standardization(data);
  REQUIRE(st.node_mean.size() == 3);
  double sum = 0;
  int count = 0;
  for (const auto& s : data) {
    const auto& g = std::get<FeatureGraph>(s.state);
    for (int i = 0; i < g.num_nodes; ++i) {
      sum += g.node_features[static_cast<size_t>(i * 3)];
      ++count;
    }
  }
  CHECK(st.node_mean[0] == doctest::Approx(sum / count).epsilon(1e-12));
}

TEST_CASE("folded predictor agrees with the reference forward pass") {
  for (int layers = 0; layers <= 3; ++layers) {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      PolicyModel model = PolicyModel::random(graph_arch(6, layers), seed);
      // nonzero biases so that every folded bias term is exercised
      Rng rng(seed + 100);
      for (double& p : model.mutable_params()) p += rng.normal(0.0, 0.3);
      const std::vector<LabeledSample> data{graph_sample(seed), graph_sample(seed + 7)};
      if (seed % 2 == 0) model.standardization = compute_standardization(data);
      GraphPredictor folded(model);
      for (const auto& s : data) {
        FeatureGraph g = std::get<FeatureGraph>(s.state);
        g.directed = seed == 3;
        const auto ref = model.predict(g);
        const auto got = folded.predict(g);
        REQUIRE(got.size() == ref.size());
        for (size_t i = 0; i < ref.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(GraphPredictor(PolicyModel::random(bipartite_arch(), 1)), std::invalid_argument);
  GraphPredictor folded(PolicyModel::random(graph_arch(), 1));
  FeatureGraph wrong = testutil::random_feature_graph(1, 5, 2, 2);
  CHECK_THROWS_AS(folded.predict(wrong), std::invalid_argument);
}

TEST_CASE("synthetic samples fit their architecture") {
  for (const Architecture& arch : {Architecture{Variant::kGraph, 3, 9, 0, 8, 2}, bipartite_arch(8, 1)}) {
    const LabeledSample s = synthetic_sample(arch, 4);
    CHECK(infer_architecture(s, arch.hidden, arch.layers) == arch);
    const PolicyModel model = PolicyModel::random(arch, 9);
    CHECK(model.predict(s.state).size() == s.num_items());
    CHECK(gradient_check(model, s, LossSpec::wce(0.8)).max_relative_error < 1e-4);
  }
}
