/** How requests for pod IRIs reach a server socket.
 *
 * Pods are addressed by authority (`https://bob.uthsc.edu/...`) while the
 * page may be served from anywhere, so the transport owns the mapping from
 * resource IRI to an actual request.  The browser transport assumes the
 * page's own host *is* the pod authority (virtual hosting); tests swap in
 * a Node transport that pins the socket and carries the authority in the
 * Host header instead.
 */

export interface PodRequest {
  method: string;
  iri: string;
  headers: Record<string, string>;
  body?: string;
}

export interface PodResponse {
  status: number;
  headers: Record<string, string>;
  body: string;
}

export type Transport = (request: PodRequest) => Promise<PodResponse>;

function pathAndQuery(iriValue: string): string {
  const url = new URL(iriValue);
  return url.pathname + url.search;
}

/** Same-origin transport: the path of the pod IRI against the page's host. */
export function fetchTransport(fetchFn: typeof fetch = fetch): Transport {
  return async (request) => {
    const response = await fetchFn(pathAndQuery(request.iri), {
      method: request.method,
      headers: request.headers,
      body: request.body,
    });
    const headers: Record<string, string> = {};
    response.headers.forEach((value, key) => {
      headers[key.toLowerCase()] = value;
    });
    return { status: response.status, headers, body: await response.text() };
  };
}
