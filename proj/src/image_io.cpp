#include "emoscreen/image_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace emoscreen {

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in, const std::string& path) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    if (token.empty()) throw data_error("image '" + path + "': truncated header");
    return token;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what) {
    const std::string token = next_token(in, path);
    try {
        return std::stoi(token);
    } catch (const std::exception&) {
        throw data_error("image '" + path + "': bad " + std::string(what) + " '" + token + "'");
    }
}

}  // namespace

Tensor load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open image '" + path + "'");
    char magic[2];
    if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw data_error("image '" + path + "': unsupported magic (need binary P5 or P6)");
    }
    const int channels = magic[1] == '5' ? 1 : 3;
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (width <= 0 || height <= 0) throw data_error("image '" + path + "': bad dimensions");
    if (maxval <= 0 || maxval > 255) {
        throw data_error("image '" + path + "': only 8-bit samples supported (maxval " +
                         std::to_string(maxval) + ")");
    }
    // The single whitespace byte separating header from raster was consumed
    // as the maxval token's terminator; the stream sits on the first sample.

    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<unsigned char> raw(count);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count))) {
        throw data_error("image '" + path + "': truncated pixel data");
    }
    Tensor out(height, width, channels);
    for (std::size_t i = 0; i < count; ++i) out.values()[i] = static_cast<float>(raw[i]);
    return out;
}

namespace {

void save_pnm(const Tensor& image, const std::string& path, int channels, const char* magic) {
    if (image.channels() != channels) {
        throw data_error("image save: expected " + std::to_string(channels) +
                         " channels, got " + image.shape_string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot create image '" + path + "'");
    out << magic << "\n" << image.width() << " " << image.height() << "\n255\n";
    std::vector<unsigned char> raw(image.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const float v = std::clamp(image.values()[i], 0.0f, 255.0f);
        raw[i] = static_cast<unsigned char>(v + 0.5f);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw io_error("short write to image '" + path + "'");
}

}  // namespace

void save_pgm(const Tensor& gray, const std::string& path) { save_pnm(gray, path, 1, "P5"); }
void save_ppm(const Tensor& rgb, const std::string& path) { save_pnm(rgb, path, 3, "P6"); }

std::vector<std::string> list_frame_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw io_error("frame directory '" + dir + "' does not exist");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Tensor> load_frames(const std::string& dir) {
    const std::vector<std::string> files = list_frame_files(dir);
    if (files.empty()) throw data_error("frame directory '" + dir + "' has no .pgm/.ppm files");
    std::vector<Tensor> frames;
    frames.reserve(files.size());
    for (const auto& file : files) {
        Tensor frame = load_pnm(file);
        if (!frames.empty() && (frame.height() != frames.front().height() ||
                                frame.width() != frames.front().width())) {
            throw data_error("frame '" + file + "' has dims " + frame.shape_string() +
                             ", expected " + frames.front().shape_string());
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

Tensor to_gray(const Tensor& image) {
    if (image.channels() == 1) return image;
    if (image.channels() != 3) {
        throw data_error("to_gray: expected 1 or 3 channels, got " + image.shape_string());
    }
    Tensor gray(image.height(), image.width(), 1);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            gray.at(y, x, 0) = static_cast<float>(0.299 * image.at(y, x, 0) +
                                                  0.587 * image.at(y, x, 1) +
                                                  0.114 * image.at(y, x, 2));
        }
    }
    return gray;
}

}  // namespace emoscreen
