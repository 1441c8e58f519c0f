#pragma once

// PLY (ascii / binary little-endian) and PCD (ascii) readers and writers.
//
// Files written here carry the cloud resolution in a comment line
// ("comment resolution <value>" in PLY, "# resolution <value>" in PCD) so a
// write/parse round trip restores it. Files without one get a resolution
// estimated from nearest-neighbor spacing.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "ced/cloud.hpp"
#include "ced/error.hpp"
#include "ced/spatial_index.hpp"

namespace ced {

enum class CloudFormat { PlyAscii, PlyBinaryLE, PcdAscii };

inline constexpr double kFallbackResolution = 0.01;

namespace detail {

inline std::uint8_t quantize_channel(double c) {
    const double clamped = std::clamp(c, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

inline double channel_from_byte(std::uint8_t b) { return static_cast<double>(b) / 255.0; }

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Sequential line reader over an in-memory buffer.
class LineReader {
public:
    explicit LineReader(std::string_view data) : data_(data) {}

    std::optional<std::string_view> next() {
        if (pos_ >= data_.size()) return std::nullopt;
        const auto nl = data_.find('\n', pos_);
        const std::size_t end = nl == std::string_view::npos ? data_.size() : nl;
        std::string_view line = data_.substr(pos_, end - pos_);
        pos_ = nl == std::string_view::npos ? data_.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    std::size_t position() const { return pos_; }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline double parse_double(std::string_view token, ErrorCode code, std::string_view what) {
    // from_chars does not accept a leading '+'.
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ptr == token.data() + token.size() && ec == std::errc()) return value;
    // Subnormals and overflow report out-of-range; strtod still yields the
    // correctly rounded value.
    const std::string copy(token);
    char* end = nullptr;
    value = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size())
        throw Error(code, fmt::format("cannot parse {} value '{}'", what, token));
    return value;
}

inline float parse_float(std::string_view token, ErrorCode code, std::string_view what) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    float fast = 0.0F;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), fast);
    if (ptr == token.data() + token.size() && ec == std::errc()) return fast;
    const std::string copy(token);
    char* end = nullptr;
    const float value = std::strtof(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size())
        throw Error(code, fmt::format("cannot parse {} value '{}'", what, token));
    return value;
}

inline std::uint64_t parse_count(std::string_view token, ErrorCode code, std::string_view what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw Error(code, fmt::format("cannot parse {} '{}'", what, token));
    return value;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyScalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline std::optional<PlyScalar> ply_scalar_from_name(std::string_view name) {
    if (name == "char" || name == "int8") return PlyScalar::Int8;
    if (name == "uchar" || name == "uint8") return PlyScalar::UInt8;
    if (name == "short" || name == "int16") return PlyScalar::Int16;
    if (name == "ushort" || name == "uint16") return PlyScalar::UInt16;
    if (name == "int" || name == "int32") return PlyScalar::Int32;
    if (name == "uint" || name == "uint32") return PlyScalar::UInt32;
    if (name == "float" || name == "float32") return PlyScalar::Float32;
    if (name == "double" || name == "float64") return PlyScalar::Float64;
    return std::nullopt;
}

inline std::size_t ply_scalar_size(PlyScalar t) {
    switch (t) {
        case PlyScalar::Int8:
        case PlyScalar::UInt8: return 1;
        case PlyScalar::Int16:
        case PlyScalar::UInt16: return 2;
        case PlyScalar::Int32:
        case PlyScalar::UInt32:
        case PlyScalar::Float32: return 4;
        case PlyScalar::Float64: return 8;
    }
    return 0;
}

inline double read_le_scalar(const unsigned char* p, PlyScalar t) {
    static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes a little-endian host");
    switch (t) {
        case PlyScalar::Int8: return static_cast<std::int8_t>(p[0]);
        case PlyScalar::UInt8: return p[0];
        case PlyScalar::Int16: {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case PlyScalar::UInt16: {
            std::uint16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case PlyScalar::Int32: {
            std::int32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PlyScalar::UInt32: {
            std::uint32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PlyScalar::Float32: {
            float v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PlyScalar::Float64: {
            double v;
            std::memcpy(&v, p, 8);
            return v;
        }
    }
    return 0.0;
}

struct PlyProperty {
    std::string name;
    PlyScalar type = PlyScalar::Float32;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::uint64_t count = 0;
    std::vector<PlyProperty> properties;

    std::size_t record_size() const {
        std::size_t size = 0;
        for (const auto& p : properties) size += ply_scalar_size(p.type);
        return size;
    }
};

struct PlyHeader {
    CloudFormat format = CloudFormat::PlyAscii;
    std::vector<PlyElement> elements;
    std::optional<double> resolution;
    std::size_t body_offset = 0;
};

inline PlyHeader parse_ply_header(std::string_view bytes) {
    LineReader reader(bytes);
    auto first = reader.next();
    if (!first || trim(*first) != "ply") throw Error(ErrorCode::MalformedHeader, "missing 'ply' magic line");

    PlyHeader header;
    bool have_format = false;
    bool ended = false;
    while (auto line = reader.next()) {
        const auto tokens = split_ws(*line);
        if (tokens.empty()) continue;
        const std::string_view key = tokens[0];
        if (key == "end_header") {
            ended = true;
            break;
        }
        if (key == "format") {
            if (tokens.size() < 3) throw Error(ErrorCode::MalformedHeader, "incomplete format line");
            if (tokens[1] == "ascii")
                header.format = CloudFormat::PlyAscii;
            else if (tokens[1] == "binary_little_endian")
                header.format = CloudFormat::PlyBinaryLE;
            else
                throw Error(ErrorCode::UnsupportedProperty, fmt::format("PLY encoding '{}'", tokens[1]));
            have_format = true;
        } else if (key == "comment") {
            if (tokens.size() >= 3 && tokens[1] == "resolution")
                header.resolution = parse_double(tokens[2], ErrorCode::MalformedHeader, "resolution");
        } else if (key == "obj_info") {
            continue;
        } else if (key == "element") {
            if (tokens.size() != 3) throw Error(ErrorCode::MalformedHeader, "element line needs a name and count");
            header.elements.push_back(
                {std::string(tokens[1]), parse_count(tokens[2], ErrorCode::MalformedHeader, "element count"), {}});
        } else if (key == "property") {
            if (header.elements.empty())
                throw Error(ErrorCode::MalformedHeader, "property declared before any element");
            PlyProperty prop;
            if (tokens.size() >= 2 && tokens[1] == "list") {
                if (tokens.size() != 5) throw Error(ErrorCode::MalformedHeader, "malformed list property");
                prop.is_list = true;
                prop.name = std::string(tokens[4]);
            } else {
                if (tokens.size() != 3) throw Error(ErrorCode::MalformedHeader, "malformed property line");
                const auto type = ply_scalar_from_name(tokens[1]);
                if (!type) throw Error(ErrorCode::MalformedHeader, fmt::format("unknown type '{}'", tokens[1]));
                prop.type = *type;
                prop.name = std::string(tokens[2]);
            }
            header.elements.back().properties.push_back(std::move(prop));
        } else {
            throw Error(ErrorCode::MalformedHeader, fmt::format("unexpected header line '{}'", *line));
        }
    }
    if (!ended) throw Error(ErrorCode::MalformedHeader, "missing end_header");
    if (!have_format) throw Error(ErrorCode::MalformedHeader, "missing format line");
    header.body_offset = reader.position();
    return header;
}

struct VertexLayout {
    std::size_t element = 0;
    std::array<int, 3> xyz{-1, -1, -1};
    std::array<int, 3> rgb{-1, -1, -1};
    bool has_color() const { return rgb[0] >= 0 && rgb[1] >= 0 && rgb[2] >= 0; }
};

inline VertexLayout vertex_layout(const PlyHeader& header) {
    VertexLayout layout;
    const auto it = std::find_if(header.elements.begin(), header.elements.end(),
                                 [](const PlyElement& e) { return e.name == "vertex"; });
    if (it == header.elements.end()) throw Error(ErrorCode::MalformedHeader, "no vertex element");
    layout.element = static_cast<std::size_t>(it - header.elements.begin());
    for (std::size_t k = 0; k < it->properties.size(); ++k) {
        const auto& p = it->properties[k];
        const int idx = static_cast<int>(k);
        const auto slot = [&](std::array<int, 3>& arr, int axis) {
            if (p.is_list) throw Error(ErrorCode::UnsupportedProperty, fmt::format("list property '{}'", p.name));
            arr[axis] = idx;
        };
        if (p.name == "x") slot(layout.xyz, 0);
        else if (p.name == "y") slot(layout.xyz, 1);
        else if (p.name == "z") slot(layout.xyz, 2);
        else if (p.name == "red") slot(layout.rgb, 0);
        else if (p.name == "green") slot(layout.rgb, 1);
        else if (p.name == "blue") slot(layout.rgb, 2);
        else if (p.is_list) throw Error(ErrorCode::UnsupportedProperty, fmt::format("list property '{}'", p.name));
    }
    for (int axis : layout.xyz)
        if (axis < 0) throw Error(ErrorCode::MalformedHeader, "vertex element lacks x, y or z");
    for (int axis : layout.xyz) {
        const PlyScalar t = it->properties[static_cast<std::size_t>(axis)].type;
        if (t != PlyScalar::Float32 && t != PlyScalar::Float64)
            throw Error(ErrorCode::UnsupportedProperty, "coordinates must be float or double");
    }
    if (layout.has_color()) {
        for (int c : layout.rgb)
            if (it->properties[static_cast<std::size_t>(c)].type != PlyScalar::UInt8)
                throw Error(ErrorCode::UnsupportedProperty, "color channels must be uchar");
    } else {
        layout.rgb = {-1, -1, -1};
    }
    return layout;
}

inline ColoredPoint point_from_values(const std::vector<double>& values, const VertexLayout& layout) {
    ColoredPoint p;
    p.gx = values[static_cast<std::size_t>(layout.xyz[0])];
    p.gy = values[static_cast<std::size_t>(layout.xyz[1])];
    p.gz = values[static_cast<std::size_t>(layout.xyz[2])];
    if (layout.has_color()) {
        p.r = channel_from_byte(static_cast<std::uint8_t>(values[static_cast<std::size_t>(layout.rgb[0])]));
        p.g = channel_from_byte(static_cast<std::uint8_t>(values[static_cast<std::size_t>(layout.rgb[1])]));
        p.b = channel_from_byte(static_cast<std::uint8_t>(values[static_cast<std::size_t>(layout.rgb[2])]));
    }
    return p;
}

inline std::vector<ColoredPoint> parse_ply_ascii_body(std::string_view body, const PlyHeader& header,
                                                      const VertexLayout& layout) {
    LineReader reader(body);
    std::vector<ColoredPoint> points;
    std::vector<double> values;
    for (std::size_t e = 0; e <= layout.element; ++e) {
        const PlyElement& element = header.elements[e];
        const bool is_vertex = e == layout.element;
        if (is_vertex) points.reserve(element.count);
        for (std::uint64_t rec = 0; rec < element.count; ++rec) {
            std::optional<std::string_view> line;
            do {
                line = reader.next();
            } while (line && trim(*line).empty());
            if (!line)
                throw Error(ErrorCode::TruncatedBody,
                            fmt::format("element '{}' declares {} records, found {}", element.name, element.count, rec));
            if (!is_vertex) continue;
            const auto tokens = split_ws(*line);
            if (tokens.size() < element.properties.size())
                throw Error(ErrorCode::TruncatedBody, fmt::format("vertex {} has too few values", rec));
            values.resize(element.properties.size());
            for (std::size_t k = 0; k < element.properties.size(); ++k)
                values[k] = element.properties[k].type == PlyScalar::Float32
                                ? parse_float(tokens[k], ErrorCode::TruncatedBody, "vertex")
                                : parse_double(tokens[k], ErrorCode::TruncatedBody, "vertex");
            points.push_back(point_from_values(values, layout));
        }
    }
    return points;
}

inline std::vector<ColoredPoint> parse_ply_binary_body(std::string_view body, const PlyHeader& header,
                                                       const VertexLayout& layout) {
    std::size_t offset = 0;
    for (std::size_t e = 0; e < layout.element; ++e) {
        const PlyElement& element = header.elements[e];
        for (const auto& p : element.properties)
            if (p.is_list)
                throw Error(ErrorCode::UnsupportedProperty,
                            fmt::format("list property in element '{}' preceding vertices", element.name));
        offset += element.record_size() * element.count;
    }
    const PlyElement& vertex = header.elements[layout.element];
    const std::size_t record = vertex.record_size();
    std::vector<std::size_t> property_offset(vertex.properties.size());
    for (std::size_t k = 0, acc = 0; k < vertex.properties.size(); ++k) {
        property_offset[k] = acc;
        acc += ply_scalar_size(vertex.properties[k].type);
    }
    const std::size_t available = body.size() > offset ? (body.size() - offset) / record : 0;
    if (available < vertex.count)
        throw Error(ErrorCode::TruncatedBody,
                    fmt::format("vertex element declares {} records, found {}", vertex.count, available));

    const auto* base = reinterpret_cast<const unsigned char*>(body.data()) + offset;
    std::vector<ColoredPoint> points;
    points.reserve(vertex.count);
    std::vector<double> values(vertex.properties.size());
    for (std::uint64_t rec = 0; rec < vertex.count; ++rec) {
        const unsigned char* row = base + rec * record;
        for (std::size_t k = 0; k < vertex.properties.size(); ++k)
            values[k] = read_le_scalar(row + property_offset[k], vertex.properties[k].type);
        points.push_back(point_from_values(values, layout));
    }
    return points;
}

inline ColoredPointCloud parse_ply(std::string_view bytes, CloudFormat declared) {
    const PlyHeader header = parse_ply_header(bytes);
    if (header.format != declared)
        throw Error(ErrorCode::MalformedHeader, "PLY encoding does not match the requested format");
    const VertexLayout layout = vertex_layout(header);
    const std::string_view body = bytes.substr(header.body_offset);

    ColoredPointCloud cloud;
    cloud.has_color = layout.has_color();
    cloud.points = declared == CloudFormat::PlyAscii ? parse_ply_ascii_body(body, header, layout)
                                                     : parse_ply_binary_body(body, header, layout);
    if (header.resolution) cloud.resolution = *header.resolution;
    else cloud.resolution = 0.0;
    return cloud;
}

// ---------------------------------------------------------------------------
// PCD

inline std::uint32_t pack_rgb(const ColoredPoint& p) {
    return (static_cast<std::uint32_t>(quantize_channel(p.r)) << 16) |
           (static_cast<std::uint32_t>(quantize_channel(p.g)) << 8) | quantize_channel(p.b);
}

inline void unpack_rgb(std::uint32_t packed, ColoredPoint& p) {
    p.r = channel_from_byte(static_cast<std::uint8_t>((packed >> 16) & 0xFF));
    p.g = channel_from_byte(static_cast<std::uint8_t>((packed >> 8) & 0xFF));
    p.b = channel_from_byte(static_cast<std::uint8_t>(packed & 0xFF));
}

inline ColoredPointCloud parse_pcd(std::string_view bytes) {
    LineReader reader(bytes);
    std::vector<std::string> fields;
    std::vector<char> types;
    std::vector<std::uint64_t> sizes;
    std::vector<std::uint64_t> counts;
    std::optional<std::uint64_t> points_decl;
    std::uint64_t width = 0;
    std::uint64_t height = 1;
    std::optional<double> resolution;
    bool have_data = false;

    while (auto line = reader.next()) {
        const std::string_view text = trim(*line);
        if (text.empty()) continue;
        const auto tokens = split_ws(text);
        if (tokens[0].front() == '#') {
            if (tokens.size() >= 3 && tokens[1] == "resolution")
                resolution = parse_double(tokens[2], ErrorCode::MalformedHeader, "resolution");
            continue;
        }
        const std::string_view key = tokens[0];
        if (key == "VERSION" || key == "VIEWPOINT") {
            continue;
        } else if (key == "SIZE") {
            for (std::size_t k = 1; k < tokens.size(); ++k)
                sizes.push_back(parse_count(tokens[k], ErrorCode::MalformedHeader, "SIZE"));
        } else if (key == "FIELDS") {
            for (std::size_t k = 1; k < tokens.size(); ++k) fields.emplace_back(tokens[k]);
        } else if (key == "TYPE") {
            for (std::size_t k = 1; k < tokens.size(); ++k) {
                if (tokens[k].size() != 1) throw Error(ErrorCode::MalformedHeader, "bad TYPE entry");
                types.push_back(tokens[k][0]);
            }
        } else if (key == "COUNT") {
            for (std::size_t k = 1; k < tokens.size(); ++k)
                counts.push_back(parse_count(tokens[k], ErrorCode::MalformedHeader, "COUNT"));
        } else if (key == "WIDTH") {
            if (tokens.size() != 2) throw Error(ErrorCode::MalformedHeader, "bad WIDTH line");
            width = parse_count(tokens[1], ErrorCode::MalformedHeader, "WIDTH");
        } else if (key == "HEIGHT") {
            if (tokens.size() != 2) throw Error(ErrorCode::MalformedHeader, "bad HEIGHT line");
            height = parse_count(tokens[1], ErrorCode::MalformedHeader, "HEIGHT");
        } else if (key == "POINTS") {
            if (tokens.size() != 2) throw Error(ErrorCode::MalformedHeader, "bad POINTS line");
            points_decl = parse_count(tokens[1], ErrorCode::MalformedHeader, "POINTS");
        } else if (key == "DATA") {
            if (tokens.size() != 2) throw Error(ErrorCode::MalformedHeader, "bad DATA line");
            if (tokens[1] != "ascii")
                throw Error(ErrorCode::UnsupportedProperty, fmt::format("PCD data encoding '{}'", tokens[1]));
            have_data = true;
            break;
        } else {
            throw Error(ErrorCode::MalformedHeader, fmt::format("unexpected header line '{}'", text));
        }
    }
    if (!have_data) throw Error(ErrorCode::MalformedHeader, "missing DATA line");
    if (fields.empty()) throw Error(ErrorCode::MalformedHeader, "missing FIELDS line");
    if (counts.empty()) counts.assign(fields.size(), 1);
    if (types.empty()) types.assign(fields.size(), 'F');
    if (sizes.empty()) sizes.assign(fields.size(), 4);
    if (types.size() != fields.size() || counts.size() != fields.size() || sizes.size() != fields.size())
        throw Error(ErrorCode::MalformedHeader, "FIELDS, SIZE, TYPE and COUNT lengths differ");

    // Token offset of each field within a record.
    std::vector<std::size_t> token_offset(fields.size());
    std::size_t tokens_per_record = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        token_offset[k] = tokens_per_record;
        tokens_per_record += counts[k];
    }
    const auto find_field = [&](std::string_view name) -> int {
        for (std::size_t k = 0; k < fields.size(); ++k)
            if (fields[k] == name) return static_cast<int>(k);
        return -1;
    };
    const std::array<int, 3> xyz{find_field("x"), find_field("y"), find_field("z")};
    for (int f : xyz)
        if (f < 0) throw Error(ErrorCode::MalformedHeader, "PCD lacks x, y or z");
    for (int f : xyz)
        if (types[static_cast<std::size_t>(f)] != 'F')
            throw Error(ErrorCode::UnsupportedProperty, "coordinates must be floating point");
    int color = find_field("rgb");
    if (color < 0) color = find_field("rgba");
    const char color_type = color >= 0 ? types[static_cast<std::size_t>(color)] : 'F';
    if (color >= 0 && color_type != 'F' && color_type != 'U')
        throw Error(ErrorCode::UnsupportedProperty, "packed color must be F or U");

    const std::uint64_t count = points_decl.value_or(width * height);
    ColoredPointCloud cloud;
    cloud.has_color = color >= 0;
    cloud.points.reserve(count);
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        std::optional<std::string_view> line;
        do {
            line = reader.next();
        } while (line && trim(*line).empty());
        if (!line)
            throw Error(ErrorCode::TruncatedBody, fmt::format("PCD declares {} points, found {}", count, rec));
        const auto tokens = split_ws(*line);
        if (tokens.size() < tokens_per_record)
            throw Error(ErrorCode::TruncatedBody, fmt::format("point {} has too few values", rec));
        const auto coordinate = [&](int field) {
            const auto f = static_cast<std::size_t>(field);
            const std::string_view tok = tokens[token_offset[f]];
            return sizes[f] == 4 ? static_cast<double>(parse_float(tok, ErrorCode::TruncatedBody, fields[f]))
                                 : parse_double(tok, ErrorCode::TruncatedBody, fields[f]);
        };
        ColoredPoint p;
        p.gx = coordinate(xyz[0]);
        p.gy = coordinate(xyz[1]);
        p.gz = coordinate(xyz[2]);
        if (color >= 0) {
            const std::string_view tok = tokens[token_offset[static_cast<std::size_t>(color)]];
            std::uint32_t packed = 0;
            if (color_type == 'F')
                packed = std::bit_cast<std::uint32_t>(parse_float(tok, ErrorCode::TruncatedBody, "rgb"));
            else
                packed = static_cast<std::uint32_t>(parse_count(tok, ErrorCode::TruncatedBody, "rgb"));
            unpack_rgb(packed, p);
        }
        cloud.points.push_back(p);
    }
    cloud.resolution = resolution.value_or(0.0);
    return cloud;
}

inline std::string format_coord(double v) { return fmt::format("{:.9g}", v); }

}  // namespace detail

/// Decodes a point-cloud file held in memory.
inline ColoredPointCloud parse_cloud(std::string_view bytes, CloudFormat format) {
    ColoredPointCloud cloud = format == CloudFormat::PcdAscii ? detail::parse_pcd(bytes) : detail::parse_ply(bytes, format);
    if (!(cloud.resolution > 0.0)) {
        const double estimated = estimate_resolution(cloud);
        cloud.resolution = estimated > 0.0 ? estimated : kFallbackResolution;
    }
    return cloud;
}

/// Encodes a cloud. Coordinates are stored as 32-bit floats (9 significant
/// digits in ascii), colors as 8-bit channels round(c * 255).
inline std::string write_cloud(const ColoredPointCloud& cloud, CloudFormat format) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "refusing to write an empty cloud");
    std::string out;
    const std::size_t n = cloud.size();
    const std::string resolution = fmt::format("{:.17g}", cloud.resolution);

    if (format == CloudFormat::PcdAscii) {
        out += "# .PCD v0.7 - Point Cloud Data file format\n";
        out += "# resolution " + resolution + "\n";
        out += "VERSION 0.7\n";
        if (cloud.has_color) {
            out += "FIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\n";
        } else {
            out += "FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n";
        }
        out += fmt::format("WIDTH {}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {}\nDATA ascii\n", n, n);
        for (const auto& p : cloud.points) {
            out += detail::format_coord(static_cast<float>(p.gx)) + ' ' + detail::format_coord(static_cast<float>(p.gy)) +
                   ' ' + detail::format_coord(static_cast<float>(p.gz));
            if (cloud.has_color)
                out += ' ' + detail::format_coord(std::bit_cast<float>(detail::pack_rgb(p)));
            out += '\n';
        }
        return out;
    }

    out += "ply\n";
    out += format == CloudFormat::PlyAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "comment resolution " + resolution + "\n";
    out += fmt::format("element vertex {}\n", n);
    out += "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_color) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";

    if (format == CloudFormat::PlyAscii) {
        for (const auto& p : cloud.points) {
            out += detail::format_coord(static_cast<float>(p.gx)) + ' ' + detail::format_coord(static_cast<float>(p.gy)) +
                   ' ' + detail::format_coord(static_cast<float>(p.gz));
            if (cloud.has_color)
                out += fmt::format(" {} {} {}", detail::quantize_channel(p.r), detail::quantize_channel(p.g),
                                   detail::quantize_channel(p.b));
            out += '\n';
        }
        return out;
    }

    const std::size_t record = cloud.has_color ? 15 : 12;
    const std::size_t header_size = out.size();
    out.resize(header_size + record * n);
    char* dst = out.data() + header_size;
    for (const auto& p : cloud.points) {
        const std::array<float, 3> xyz{static_cast<float>(p.gx), static_cast<float>(p.gy), static_cast<float>(p.gz)};
        std::memcpy(dst, xyz.data(), 12);
        if (cloud.has_color) {
            dst[12] = static_cast<char>(detail::quantize_channel(p.r));
            dst[13] = static_cast<char>(detail::quantize_channel(p.g));
            dst[14] = static_cast<char>(detail::quantize_channel(p.b));
        }
        dst += record;
    }
    return out;
}

/// Format implied by the file extension; PLY files are further told apart
/// by their format line.
inline CloudFormat detect_format(const std::filesystem::path& path, std::string_view bytes) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pcd") return CloudFormat::PcdAscii;
    if (bytes.substr(0, 3) == "ply") return detail::parse_ply_header(bytes).format;
    if (ext == ".ply") throw Error(ErrorCode::MalformedHeader, "file has .ply extension but no PLY magic");
    throw Error(ErrorCode::UnsupportedProperty, fmt::format("cannot infer the format of '{}'", path.string()));
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

inline ColoredPointCloud load_cloud(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    return parse_cloud(bytes, detect_format(path, bytes));
}

inline void save_cloud(const std::filesystem::path& path, const ColoredPointCloud& cloud, CloudFormat format) {
    write_file_bytes(path, write_cloud(cloud, format));
}

}  // namespace ced
