// SPDX-License-Identifier: Apache-2.0
#include "evtherm/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace evtherm {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr char kKind[] = "evtherm-ensemble";

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index n_rows,
                                 Eigen::Index n_cols, const char* what) {
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows) {
        throw std::runtime_error(std::string("model file: bad row count for ") + what);
    }
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw std::runtime_error(std::string("model file: bad column count for ") + what);
        }
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, Eigen::Index n,
                                 const char* what) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != n) {
        throw std::runtime_error(std::string("model file: bad length for ") + what);
    }
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model) {
    const auto& ens = model.ensemble;
    if (ens.members.empty()) {
        throw std::invalid_argument("save_model: empty ensemble");
    }
    const MlpShape shape = ens.members.front().shape();

    json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = kKind;
    doc["shape"] = {{"input", shape.input},
                    {"hidden1", shape.hidden1},
                    {"hidden2", shape.hidden2}};
    doc["normalization"] = {{"input_mean_w", ens.norm.input_mean_w},
                            {"input_std_w", ens.norm.input_std_w},
                            {"target_mean_c", ens.norm.target_mean_c},
                            {"target_std_c", ens.norm.target_std_c}};

    json members = json::array();
    for (std::size_t i = 0; i < ens.members.size(); ++i) {
        const MlpWeights& w = ens.members[i];
        if (w.shape() != shape) {
            throw std::invalid_argument("save_model: inconsistent member shapes");
        }
        json member;
        member["seed"] = ens.member_seeds.at(i);
        member["w1"] = matrix_to_json(w.w1);
        member["b1"] = vector_to_json(w.b1);
        member["w2"] = matrix_to_json(w.w2);
        member["b2"] = vector_to_json(w.b2);
        member["w3"] = vector_to_json(w.w3.transpose());
        member["b3"] = w.b3;
        members.push_back(std::move(member));
    }
    doc["members"] = std::move(members);

    doc["training"] = {{"epochs", model.training.epochs},
                       {"batch_size", model.training.batch_size},
                       {"learning_rate", model.training.learning_rate},
                       {"base_seed", model.training.base_seed},
                       {"split_seed", model.training.split_seed},
                       {"train_rows", model.training.train_rows},
                       {"validation_rows", model.training.validation_rows},
                       {"member_val_rmse_c", model.training.member_val_rmse_c}};
    doc["baseline"] = {{"ema_alpha", model.baseline.ema_alpha},
                       {"sma_window", model.baseline.sma_window},
                       {"std_floor_c", model.baseline.std_floor_c},
                       {"train_ema_p99", model.baseline.train_ema_p99},
                       {"hist_bin_width", model.baseline.train_ema_hist.bin_width},
                       {"hist_counts", model.baseline.train_ema_hist.counts}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(1, '\t') << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("model file " + path + ": " + e.what());
    }
    if (doc.value("kind", "") != kKind ||
        doc.value("format_version", -1) != kFormatVersion) {
        throw std::runtime_error("model file " + path + ": unrecognized format");
    }

    ModelFile model;
    MlpShape shape;
    shape.input = doc.at("shape").at("input").get<int>();
    shape.hidden1 = doc.at("shape").at("hidden1").get<int>();
    shape.hidden2 = doc.at("shape").at("hidden2").get<int>();

    const json& norm = doc.at("normalization");
    model.ensemble.norm.input_mean_w = norm.at("input_mean_w").get<double>();
    model.ensemble.norm.input_std_w = norm.at("input_std_w").get<double>();
    model.ensemble.norm.target_mean_c = norm.at("target_mean_c").get<double>();
    model.ensemble.norm.target_std_c = norm.at("target_std_c").get<double>();

    for (const json& member : doc.at("members")) {
        MlpWeights w;
        w.w1 = matrix_from_json(member.at("w1"), shape.hidden1, shape.input, "w1");
        w.b1 = vector_from_json(member.at("b1"), shape.hidden1, "b1");
        w.w2 = matrix_from_json(member.at("w2"), shape.hidden2, shape.hidden1, "w2");
        w.b2 = vector_from_json(member.at("b2"), shape.hidden2, "b2");
        w.w3 = vector_from_json(member.at("w3"), shape.hidden2, "w3").transpose();
        w.b3 = member.at("b3").get<double>();
        w.require_finite();
        model.ensemble.members.push_back(std::move(w));
        model.ensemble.member_seeds.push_back(member.at("seed").get<std::uint64_t>());
    }
    if (model.ensemble.members.empty()) {
        throw std::runtime_error("model file " + path + ": no members");
    }

    const json& training = doc.at("training");
    model.training.epochs = training.at("epochs").get<int>();
    model.training.batch_size = training.at("batch_size").get<int>();
    model.training.learning_rate = training.at("learning_rate").get<double>();
    model.training.base_seed = training.at("base_seed").get<std::uint64_t>();
    model.training.split_seed = training.at("split_seed").get<std::uint64_t>();
    model.training.train_rows = training.at("train_rows").get<std::size_t>();
    model.training.validation_rows =
        training.at("validation_rows").get<std::size_t>();
    model.training.member_val_rmse_c =
        training.at("member_val_rmse_c").get<std::vector<double>>();

    const json& baseline = doc.at("baseline");
    model.baseline.ema_alpha = baseline.at("ema_alpha").get<double>();
    model.baseline.sma_window = baseline.at("sma_window").get<std::size_t>();
    model.baseline.std_floor_c = baseline.at("std_floor_c").get<double>();
    model.baseline.train_ema_p99 = baseline.at("train_ema_p99").get<double>();
    model.baseline.train_ema_hist.bin_width =
        baseline.at("hist_bin_width").get<double>();
    model.baseline.train_ema_hist.counts =
        baseline.at("hist_counts").get<std::vector<std::size_t>>();
    return model;
}

}  // namespace evtherm
