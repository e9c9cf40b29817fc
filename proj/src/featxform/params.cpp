#include <corrkit/params.hpp>

#include "../formats/byte_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <numeric>

namespace corrkit {

namespace {

constexpr const char* kFormatName = "corrkit.params";
constexpr int kFormatVersion = 1;

std::size_t element_count(const std::vector<int>& shape)
{
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 1) {
            throw ArgumentError("ParameterStore: tensor dimensions must be >= 1");
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

} // namespace

void ParameterStore::add(std::string name, std::vector<int> shape, std::vector<double> values)
{
    if (contains(name)) {
        throw ArgumentError("ParameterStore: duplicate tensor '" + name + "'");
    }
    if (element_count(shape) != values.size()) {
        throw ArgumentError("ParameterStore: tensor '" + name + "' shape does not match its values");
    }
    tensors_.push_back({std::move(name), std::move(shape), std::move(values)});
}

const Tensor& ParameterStore::get(const std::string& name) const
{
    for (const auto& t : tensors_) {
        if (t.name == name) {
            return t;
        }
    }
    throw ArgumentError("ParameterStore: no tensor named '" + name + "'");
}

bool ParameterStore::contains(const std::string& name) const
{
    return std::any_of(tensors_.begin(), tensors_.end(), [&](const Tensor& t) { return t.name == name; });
}

long long ParameterStore::attribute(const std::string& key) const
{
    const auto it = attributes_.find(key);
    if (it == attributes_.end()) {
        throw ArgumentError("ParameterStore: missing attribute '" + key + "'");
    }
    return it->second;
}

std::string ParameterStore::manifest() const
{
    nlohmann::ordered_json j;
    j["format"] = kFormatName;
    j["version"] = kFormatVersion;
    j["dtype"] = "float64-le";
    j["attributes"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : attributes_) {
        j["attributes"][k] = v;
    }
    j["tensors"] = nlohmann::ordered_json::array();
    std::size_t offset = 0;
    for (const auto& t : tensors_) {
        j["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", t.values.size()}});
        offset += t.values.size();
    }
    return j.dump(2) + "\n";
}

Bytes ParameterStore::blob() const
{
    Bytes out;
    for (const auto& t : tensors_) {
        for (double x : t.values) {
            const auto bits = std::bit_cast<std::uint64_t>(x);
            detail::put_u32(out, static_cast<std::uint32_t>(bits), true);
            detail::put_u32(out, static_cast<std::uint32_t>(bits >> 32), true);
        }
    }
    return out;
}

ParameterStore ParameterStore::parse(std::string_view manifest, ByteView blob)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("parameter manifest: ") + e.what(), 1);
    }
    try {
        if (j.at("format") != kFormatName || j.at("version") != kFormatVersion || j.at("dtype") != "float64-le") {
            throw ParseError("parameter manifest: unsupported format", 1);
        }
        ParameterStore store;
        for (const auto& [k, v] : j.at("attributes").items()) {
            store.set_attribute(k, v.get<long long>());
        }
        for (const auto& t : j.at("tensors")) {
            const auto offset = t.at("offset").get<std::size_t>();
            const auto count = t.at("count").get<std::size_t>();
            if (offset > blob.size() / 8 || count > blob.size() / 8 - offset) {
                throw FormatError("parameter blob shorter than manifest", blob.size());
            }
            detail::ByteReader in(blob, offset * 8);
            std::vector<double> values(count);
            for (auto& x : values) {
                const std::uint64_t lo = in.u32(true, "parameter blob");
                const std::uint64_t hi = in.u32(true, "parameter blob");
                x = std::bit_cast<double>(lo | hi << 32);
            }
            store.add(t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>(), std::move(values));
        }
        return store;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("parameter manifest: ") + e.what(), 1);
    }
}

void ParameterStore::save(const std::string& prefix) const
{
    write_text_file(prefix + ".json", manifest());
    write_file(prefix + ".bin", blob());
}

ParameterStore ParameterStore::load(const std::string& prefix)
{
    const std::string manifest = read_text_file(prefix + ".json");
    const Bytes blob = read_file(prefix + ".bin");
    return parse(manifest, blob);
}

// ---------------------------------------------------------------------------

void add_linear(ParameterStore& store, const std::string& name, const Linear& layer)
{
    store.add(name + ".weight", {layer.out, layer.in}, layer.weight);
    store.add(name + ".bias", {layer.out}, layer.bias);
}

Linear get_linear(const ParameterStore& store, const std::string& name)
{
    const Tensor& w = store.get(name + ".weight");
    const Tensor& b = store.get(name + ".bias");
    if (w.shape.size() != 2 || b.shape.size() != 1 || b.shape[0] != w.shape[0]) {
        throw ArgumentError("ParameterStore: '" + name + "' is not a linear layer");
    }
    Linear l{w.shape[1], w.shape[0], w.values, b.values};
    l.validate(name.c_str());
    return l;
}

ParameterStore to_parameters(const UpsampleAttention& attn)
{
    attn.validate();
    ParameterStore store;
    store.set_attribute("heads", attn.heads);
    store.set_attribute("scale", attn.scale);
    add_linear(store, "query", attn.query);
    add_linear(store, "key", attn.key);
    add_linear(store, "value", attn.value);
    add_linear(store, "output", attn.output);
    return store;
}

UpsampleAttention upsample_attention_from(const ParameterStore& store)
{
    UpsampleAttention a;
    a.heads = static_cast<int>(store.attribute("heads"));
    a.scale = static_cast<int>(store.attribute("scale"));
    a.query = get_linear(store, "query");
    a.key = get_linear(store, "key");
    a.value = get_linear(store, "value");
    a.output = get_linear(store, "output");
    a.guide_channels = a.query.in;
    a.feature_channels = a.key.in;
    a.model_channels = a.query.out;
    a.out_channels = a.output.out;
    a.validate();
    return a;
}

ParameterStore to_parameters(const PatchEmbedSpec& spec)
{
    spec.validate();
    ParameterStore store;
    for (int i = 0; i < 4; ++i) {
        store.set_attribute("input_channels." + std::to_string(i), spec.input_channels[i]);
        add_linear(store, "projection." + std::to_string(i), spec.projections[i]);
    }
    add_linear(store, "fuse_hidden", spec.fuse_hidden);
    add_linear(store, "fuse_out", spec.fuse_out);
    return store;
}

PatchEmbedSpec patch_embed_from(const ParameterStore& store)
{
    PatchEmbedSpec spec;
    for (int i = 0; i < 4; ++i) {
        spec.input_channels[i] = static_cast<int>(store.attribute("input_channels." + std::to_string(i)));
        spec.projections[i] = get_linear(store, "projection." + std::to_string(i));
    }
    spec.fuse_hidden = get_linear(store, "fuse_hidden");
    spec.fuse_out = get_linear(store, "fuse_out");
    spec.validate();
    return spec;
}

} // namespace corrkit
