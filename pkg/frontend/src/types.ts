// Wire types for the policy service. Everything here mirrors what the HTTP
// endpoints actually send; the client never invents fields of its own.

export type NodeType = "P" | "C" | "A" | "R" | "Pr" | "O" | "D" | "E" | "G";

export type Shape =
  | "Pentagon"
  | "Triangle"
  | "Square"
  | "Diamond"
  | "Hexagon"
  | "Circle"
  | "Ring";

export interface GraphNode {
  id: number;
  type: NodeType;
  label: string;
  shape: Shape;
  ports: 1 | 3;
  color: string;
}

export interface Endpoint {
  node: number;
  port: string;
}

export interface GraphEdge {
  id: number;
  type: string;
  from: Endpoint;
  to: Endpoint;
  arrows: "forward" | "none";
  color: string;
  aux?: boolean;
}

export interface GraphDoc {
  nodes: GraphNode[];
  edges: GraphEdge[];
  at: number;
}

export type Verdict = "grant" | "deny" | "undetermined";

export interface JustificationNode {
  id: number;
  label: string;
}

// A grant or deny comes with the chain of graph nodes that justifies it; an
// undetermined verdict only carries a sentence saying why.
export interface Decision {
  verdict: Verdict;
  justification: JustificationNode[] | string;
}

export type DutyStatus = "pending" | "fulfilled" | "violated";

export interface DutyRow {
  principal: string;
  action: string;
  resource: string;
  start: string | null;
  end: string | null;
  status: DutyStatus;
  fulfilling: string | null;
  origin: string;
}

export interface DeltaDuty {
  duty: string;
  principal: string;
  action: string;
  resource: string;
  status: DutyStatus;
  fulfilling: string | null;
}

export interface EventDelta {
  created: DeltaDuty[];
  closed: DeltaDuty[];
  duties: DeltaDuty[];
  at: number;
}

export interface DerivationNode {
  node: number;
  events: number;
  duties: number;
}

export interface DerivationStep {
  parent: number;
  child: number;
  kind: "event" | "rule";
  label: string;
}

export interface DerivationDoc {
  current: number;
  nodes: DerivationNode[];
  steps: DerivationStep[];
}

export interface StrategyStep {
  node: number;
  rule: string;
  match: string;
}

export interface StrategyReport {
  steps: StrategyStep[];
  at: number;
}

export interface SessionCreated {
  id: string;
  mode: "fresh" | "resume";
  nodes: number;
}

export interface SessionInfo {
  id: string;
  created: number;
  mode: "fresh" | "resume";
  steps: number;
}
