import { defineConfig } from "vitest/config";

// The dev server proxies API calls to the planning service so the console
// can run same-origin. Point UVGI_API at a different host:port if needed.
const api = process.env.UVGI_API ?? "http://127.0.0.1:8000";

export default defineConfig({
  server: {
    port: 5173,
    proxy: {
      "/profiles": api,
      "/scenes": api,
      "/runs": api,
    },
  },
  test: {
    environment: "node",
  },
});
