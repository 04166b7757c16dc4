#include "motil/image.hpp"

#include <cctype>
#include <fstream>

#include "motil/errors.hpp"

namespace motil {

ImageF to_float(const Image8& img) {
    ImageF out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i] = static_cast<float>(img.pixels[i]);
    }
    return out;
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

} // namespace

Image8 read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    if (next_pgm_token(in) != "P5")
        throw IngestError(path.string() + ": not a binary PGM (P5)");
    const std::string ws = next_pgm_token(in);
    const std::string hs = next_pgm_token(in);
    const std::string ms = next_pgm_token(in);
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(ws);
        h = std::stoi(hs);
        maxval = std::stoi(ms);
    } catch (const std::exception&) {
        throw IngestError(path.string() + ": malformed PGM header");
    }
    if (w <= 0 || h <= 0) throw IngestError(path.string() + ": bad PGM geometry");
    if (maxval != 255)
        throw IngestError(path.string() + ": only 8-bit PGM supported (maxval 255)");

    Image8 img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw IngestError(path.string() + ": truncated pixel data");
    return img;
}

void write_pgm(const std::filesystem::path& path, const Image8& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace motil
