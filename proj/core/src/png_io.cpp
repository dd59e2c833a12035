#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rfvqa/error.hpp"
#include "rfvqa/render.hpp"

namespace rfvqa {

namespace {

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void flush_noop(png_structp) {}

void read_from_buffer(png_structp png, png_bytep data, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->size) png_error(png, "truncated PNG stream");
  std::memcpy(data, cur->data + cur->pos, len);
  cur->pos += len;
}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// The setjmp frames below hold no objects with destructors.
bool encode_raw(const Image* image, std::vector<std::uint8_t>* out, std::string* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image->width), static_cast<png_uint_32>(image->height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (std::size_t y = 0; y < image->height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image->rgb.data() + 3 * y * image->width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

bool decode_raw(ReadCursor* cursor, Image* img, std::string* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, cursor, read_from_buffer);
  png_read_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_error(png, "expected an 8-bit RGB PNG");
  }
  img->width = w;
  img->height = h;
  img->rgb.resize(3 * static_cast<std::size_t>(w) * h);
  for (std::size_t y = 0; y < h; ++y) png_read_row(png, img->rgb.data() + 3 * y * w, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width == 0 || image.height == 0 || image.rgb.size() != 3 * image.width * image.height) {
    throw InvalidArgument("encode_png: invalid image buffer");
  }
  std::vector<std::uint8_t> out;
  std::string err = "PNG encoder initialisation failed";
  if (!encode_raw(&image, &out, &err)) throw IoError("libpng: " + err);
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw IoError("not a PNG stream");
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  Image img;
  std::string err = "PNG decoder initialisation failed";
  if (!decode_raw(&cursor, &img, &err)) throw IoError("libpng: " + err);
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingArtifact(path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace rfvqa
