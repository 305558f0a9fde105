#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowaug/augment.hpp"
#include "flowaug/batching.hpp"
#include "flowaug/synth.hpp"
#include "flowaug/trainer.hpp"

namespace flowaug {

struct DatasetConfig {
    std::string path;  // JSON Lines file; ignored when use_synth
    bool use_synth = false;
    SynthSpec synth;
    int min_pkts = 10;
};

// One experiment description: dataset, folds, augmentation pool, batch plan
// and trainer settings. Parsed from the JSON config file; flag overrides are
// applied by the CLI before hashing.
struct RunConfig {
    DatasetConfig dataset;
    int n_folds = 5;
    std::uint64_t fold_seed = 1;
    std::vector<std::string> augmentations;  // empty or {"all"} = full catalog
    Magnitude magnitude;
    BatchPlan plan;
    TrainConfig train;
    bool collect_latents = false;
    int latent_aug_copies = 5;
};

namespace detail {

inline Magnitude parse_magnitude(const nlohmann::json& j) {
    Magnitude m;
    const std::string policy = j.value("policy", "uniform");
    if (policy == "fixed") {
        m.policy = Magnitude::Policy::Fixed;
        m.alpha = j.value("alpha", 0.5);
    } else if (policy == "uniform") {
        m.policy = Magnitude::Policy::UniformPerSample;
    } else {
        throw DataError("unknown magnitude policy: '" + policy + "'");
    }
    return m;
}

inline nlohmann::json magnitude_to_json(const Magnitude& m) {
    if (m.policy == Magnitude::Policy::Fixed)
        return {{"policy", "fixed"}, {"alpha", m.alpha}};
    return {{"policy", "uniform"}};
}

}  // namespace detail

inline std::vector<std::string> resolve_augmentations(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    if (names.empty() || (names.size() == 1 && names.front() == "all")) {
        for (const auto& info : augmentation_catalog()) out.push_back(info.name);
        return out;
    }
    for (const auto& name : names) {
        aug_from_name(name);  // validates
        out.push_back(name);
    }
    return out;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        if (d.contains("synth")) {
            const auto& s = d.at("synth");
            cfg.dataset.use_synth = true;
            cfg.dataset.synth.n_classes = s.value("classes", 5);
            if (s.contains("flows_per_class"))
                s.at("flows_per_class").get_to(cfg.dataset.synth.flows_per_class);
            else
                cfg.dataset.synth.flows_per_class.assign(
                    static_cast<std::size_t>(cfg.dataset.synth.n_classes), s.value("flows", 400));
            cfg.dataset.synth.jitter = s.value("jitter", 1.0);
            cfg.dataset.synth.seed = s.value("seed", std::uint64_t{0});
        } else if (d.contains("path")) {
            cfg.dataset.path = d.at("path").get<std::string>();
        } else {
            throw DataError("dataset config needs either 'synth' or 'path'");
        }
        cfg.dataset.min_pkts = d.value("min_pkts", 10);
    } else {
        throw DataError("config is missing the 'dataset' section");
    }
    if (j.contains("folds")) {
        cfg.n_folds = j.at("folds").value("n", 5);
        cfg.fold_seed = j.at("folds").value("seed", std::uint64_t{1});
    }
    if (j.contains("augmentations")) j.at("augmentations").get_to(cfg.augmentations);
    if (j.contains("magnitude")) cfg.magnitude = detail::parse_magnitude(j.at("magnitude"));

    if (j.contains("plan")) {
        const auto& p = j.at("plan");
        const std::string policy = p.value("policy", "inject");
        if (policy == "noaug")
            cfg.plan.policy = BatchPolicy::NoAug;
        else if (policy == "replace")
            cfg.plan.policy = BatchPolicy::Replace;
        else if (policy == "inject")
            cfg.plan.policy = BatchPolicy::Inject;
        else if (policy == "preaugment")
            cfg.plan.policy = BatchPolicy::PreAugment;
        else
            throw DataError("unknown batch policy: '" + policy + "'");
        cfg.plan.p_replace = p.value("p_replace", 0.5);
        cfg.plan.n_inject = p.value("n_inject", 1);
        cfg.plan.preaugment_factor = p.value("factor", 10);
        cfg.plan.batch_size = p.value("batch_size", 1024);
        cfg.plan.class_weighted = p.value("class_weighted", false);
        if (p.contains("combiner")) {
            const auto& c = p.at("combiner");
            const std::string type = c.value("type", "none");
            if (type == "ensemble")
                cfg.plan.combiner.type = CombinerType::Ensemble;
            else if (type == "random_stack")
                cfg.plan.combiner.type = CombinerType::RandomStack;
            else if (type == "masked_stack")
                cfg.plan.combiner.type = CombinerType::MaskedStack;
            else if (type == "none")
                cfg.plan.combiner.type = CombinerType::None;
            else
                throw DataError("unknown combiner type: '" + type + "'");
            cfg.plan.combiner.p_apply = c.value("p", 0.5);
            if (c.contains("augs"))
                for (const auto& name : c.at("augs")) {
                    AugmentationSpec spec;
                    spec.kind = aug_from_name(name.get<std::string>());
                    spec.magnitude = cfg.magnitude;
                    cfg.plan.combiner.augs.push_back(spec);
                }
            if (c.contains("order")) c.at("order").get_to(cfg.plan.combiner.order);
            if (cfg.plan.combiner.type != CombinerType::None && cfg.plan.combiner.augs.empty())
                throw DataError("combiner needs a nonempty 'augs' list");
        }
    } else {
        cfg.plan.policy = BatchPolicy::Inject;
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.max_epochs = t.value("max_epochs", 500);
        cfg.train.patience = t.value("patience", 20);
        cfg.train.min_delta = t.value("min_delta", 0.02);
        cfg.train.lr0 = t.value("lr0", 1e-3);
        cfg.train.weight_decay = t.value("weight_decay", 1e-4);
        cfg.train.width = t.value("width", 64);
    }
    if (j.contains("latents")) {
        cfg.collect_latents = j.at("latents").value("collect", false);
        cfg.latent_aug_copies = j.at("latents").value("aug_copies", 5);
    }
    return cfg;
}

// Canonical echo used for hashing and for stamping reports.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    if (cfg.dataset.use_synth) {
        j["dataset"]["synth"] = {{"classes", cfg.dataset.synth.n_classes},
                                 {"flows_per_class", cfg.dataset.synth.flows_per_class},
                                 {"jitter", cfg.dataset.synth.jitter},
                                 {"seed", cfg.dataset.synth.seed}};
    } else {
        j["dataset"]["path"] = cfg.dataset.path;
    }
    j["dataset"]["min_pkts"] = cfg.dataset.min_pkts;
    j["folds"] = {{"n", cfg.n_folds}, {"seed", cfg.fold_seed}};
    j["augmentations"] = resolve_augmentations(cfg.augmentations);
    j["magnitude"] = detail::magnitude_to_json(cfg.magnitude);
    const char* policy = "noaug";
    switch (cfg.plan.policy) {
        case BatchPolicy::NoAug: policy = "noaug"; break;
        case BatchPolicy::Replace: policy = "replace"; break;
        case BatchPolicy::Inject: policy = "inject"; break;
        case BatchPolicy::PreAugment: policy = "preaugment"; break;
    }
    j["plan"] = {{"policy", policy},
                 {"p_replace", cfg.plan.p_replace},
                 {"n_inject", cfg.plan.n_inject},
                 {"factor", cfg.plan.preaugment_factor},
                 {"batch_size", cfg.plan.batch_size},
                 {"class_weighted", cfg.plan.class_weighted}};
    if (cfg.plan.combiner.type != CombinerType::None) {
        const char* type = cfg.plan.combiner.type == CombinerType::Ensemble ? "ensemble"
                           : cfg.plan.combiner.type == CombinerType::RandomStack ? "random_stack"
                                                                                 : "masked_stack";
        nlohmann::json augs = nlohmann::json::array();
        for (const auto& spec : cfg.plan.combiner.augs) augs.push_back(aug_name(spec.kind));
        j["plan"]["combiner"] = {{"type", type},
                                 {"p", cfg.plan.combiner.p_apply},
                                 {"augs", augs},
                                 {"order", cfg.plan.combiner.order}};
    }
    j["train"] = {{"max_epochs", cfg.train.max_epochs},  {"patience", cfg.train.patience},
                  {"min_delta", cfg.train.min_delta},    {"lr0", cfg.train.lr0},
                  {"weight_decay", cfg.train.weight_decay}, {"width", cfg.train.width}};
    j["latents"] = {{"collect", cfg.collect_latents}, {"aug_copies", cfg.latent_aug_copies}};
    return j;
}

inline std::string config_hash(const RunConfig& cfg, std::uint64_t master_seed) {
    const std::string dump = config_to_json(cfg).dump() + "#" + std::to_string(master_seed);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : dump) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace flowaug
