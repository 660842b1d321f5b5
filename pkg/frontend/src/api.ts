/** Typed client over the pod server's HTTP interface. */

import { AclRule, aclDocumentIri, composeAclDocument, parseAclDocument } from "./acl.js";
import { Preferences, parsePreferences, preferencesIri, serializePreferences } from "./prefs.js";
import { Graph, iri } from "./rdf.js";
import { parseTurtle } from "./turtle.js";
import { Transport } from "./transport.js";
import { LDP_BASIC_CONTAINER, LDP_CONTAINS, RDF_TYPE } from "./vocab.js";

const TURTLE = "text/turtle";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    /** The access mode the server said was missing, when it told us. */
    readonly neededMode?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ContainerChild {
  iri: string;
  name: string;
  types: string[];
}

export interface ContainerListing {
  iri: string;
  types: string[];
  children: ContainerChild[];
  graph: Graph;
}

export interface AclState {
  /** Rules from the resource's own document; empty when it has none and
   * access is inherited from an ancestor. */
  rules: AclRule[];
  hasOwnDocument: boolean;
}

export class PodApi {
  constructor(
    private readonly transport: Transport,
    private readonly token?: string,
  ) {}

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const base: Record<string, string> = { ...extra };
    if (this.token) base["Authorization"] = `Bearer ${this.token}`;
    return base;
  }

  private async request(
    method: string,
    target: string,
    options: { headers?: Record<string, string>; body?: string; okStatuses?: number[] } = {},
  ) {
    const response = await this.transport({
      method,
      iri: target,
      headers: this.headers(options.headers ?? {}),
      body: options.body,
    });
    const ok = options.okStatuses ?? [200, 201, 204];
    if (!ok.includes(response.status)) {
      throw new ApiError(
        `${method} ${target} -> ${response.status}: ${response.body.trim()}`,
        response.status,
        response.headers["x-needed-mode"],
      );
    }
    return response;
  }

  async getTurtle(target: string): Promise<Graph> {
    const response = await this.request("GET", target, { headers: { Accept: TURTLE } });
    return parseTurtle(response.body, target);
  }

  async getRaw(target: string): Promise<string> {
    const response = await this.request("GET", target, { headers: { Accept: TURTLE } });
    return response.body;
  }

  async putTurtle(target: string, body: string): Promise<void> {
    await this.request("PUT", target, { headers: { "Content-Type": TURTLE }, body });
  }

  async postTurtle(container: string, body: string, slug?: string): Promise<string> {
    const headers: Record<string, string> = { "Content-Type": TURTLE };
    if (slug) headers["Slug"] = slug;
    const response = await this.request("POST", container, { headers, body });
    return response.headers["location"] ?? "";
  }

  async delete(target: string): Promise<void> {
    await this.request("DELETE", target);
  }

  /** One container plus its children, with any advertised child types. */
  async listContainer(target: string): Promise<ContainerListing> {
    const withSlash = target.endsWith("/") ? target : `${target}/`;
    const graph = await this.getTurtle(withSlash);
    const subject = iri(withSlash);
    const types = graph
      .objects(subject, RDF_TYPE)
      .flatMap((t) => (t.kind === "iri" ? [t.value] : []));
    const children: ContainerChild[] = [];
    for (const child of graph.objects(subject, LDP_CONTAINS)) {
      if (child.kind !== "iri") continue;
      const childTypes = graph
        .objects(child, RDF_TYPE)
        .flatMap((t) => (t.kind === "iri" ? [t.value] : []));
      children.push({
        iri: child.value,
        name: child.value.slice(withSlash.length),
        types: childTypes,
      });
    }
    children.sort((a, b) => (a.name < b.name ? -1 : 1));
    return { iri: withSlash, types, children, graph };
  }

  /** Whether an IRI names a container, judged by its served graph. */
  isContainer(graph: Graph, target: string): boolean {
    const withSlash = target.endsWith("/") ? target : `${target}/`;
    return graph
      .objects(iri(withSlash), RDF_TYPE)
      .some((t) => t.kind === "iri" && t.value === LDP_BASIC_CONTAINER);
  }

  /** The container listing merged with every readable child document. */
  async glob(container: string): Promise<Graph> {
    const withSlash = container.endsWith("/") ? container : `${container}/`;
    const response = await this.request("GET", `${withSlash}*`, { headers: { Accept: TURTLE } });
    return parseTurtle(response.body, withSlash);
  }

  async readAcl(resource: string): Promise<AclState> {
    const doc = aclDocumentIri(resource);
    try {
      const response = await this.request("GET", doc, { headers: { Accept: TURTLE } });
      return { rules: parseAclDocument(response.body, doc), hasOwnDocument: true };
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        return { rules: [], hasOwnDocument: false };
      }
      throw error;
    }
  }

  async writeAcl(resource: string, rules: AclRule[]): Promise<void> {
    await this.putTurtle(aclDocumentIri(resource), composeAclDocument(resource, rules));
  }

  async getPreferences(authority: string): Promise<Preferences> {
    const target = preferencesIri(authority);
    const response = await this.request("GET", target, { headers: { Accept: TURTLE } });
    return parsePreferences(response.body, target);
  }

  async savePreferences(authority: string, prefs: Preferences): Promise<void> {
    await this.putTurtle(preferencesIri(authority), serializePreferences(authority, prefs));
  }
}
