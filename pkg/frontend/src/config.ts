/** Service base URL, resolved at runtime: `?service=` query parameter
 * first, then a `window.RSV_SERVICE_URL` global, then localhost. */
export function serviceBaseUrl(
  search: string = typeof location !== "undefined" ? location.search : "",
  global: unknown = typeof window !== "undefined"
    ? (window as unknown as Record<string, unknown>)["RSV_SERVICE_URL"]
    : undefined,
): string {
  const fromQuery = new URLSearchParams(search).get("service");
  const base = fromQuery ?? (typeof global === "string" ? global : null)
    ?? "http://localhost:8000";
  return base.replace(/\/+$/, "");
}
